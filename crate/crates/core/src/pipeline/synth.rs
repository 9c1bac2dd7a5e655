use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::media::{frame_file_name, read_clip_meta, read_frame, write_frame, Clip, ClipMeta, Frame, CLIP_META_FILE};
use crate::{Error, Result};

use super::plan::{stream, tag};
use super::{apply_plan, DegradationPlan, PipelineConfig, Planner, ShuffleQueue};

pub const MANIFEST_FILE: &str = "manifest.json";

/// An HR patch group, its degraded LR counterpart and the plan that links
/// them.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGroup {
    pub hr: Clip,
    pub lr: Clip,
    pub plan: DegradationPlan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CropWindow {
    pub top: usize,
    pub left: usize,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub index: u64,
    /// Relative to the output root.
    pub hr_dir: String,
    pub lr_dir: String,
    /// Relative to the HR root.
    pub source_clip: String,
    pub start_frame: usize,
    pub crop: CropWindow,
    pub flip_horizontal: bool,
    pub flip_vertical: bool,
    pub plan: DegradationPlan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub config: PipelineConfig,
    pub groups: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.into(),
            message: e.to_string(),
        })
    }
}

#[derive(Debug, Clone)]
struct GroupJob {
    index: u64,
    clip_dir: PathBuf,
    source_clip: String,
    start_frame: usize,
    frame_rate: f64,
}

fn find_clip_dirs(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    if dir.join(CLIP_META_FILE).is_file() {
        out.push(dir.to_path_buf());
    }
    let mut subdirs = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if entry.file_type().map_err(|e| Error::io(entry.path(), e))?.is_dir() {
            subdirs.push(entry.path());
        }
    }
    subdirs.sort();
    for d in subdirs {
        find_clip_dirs(&d, out)?;
    }
    Ok(())
}

/// Clip directories under `root` (including `root` itself), sorted by path.
pub fn discover_clips(root: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(Error::NoClipsFound(root.into()));
    }
    let mut out = Vec::new();
    find_clip_dirs(root, &mut out)?;
    out.sort();
    if out.is_empty() {
        return Err(Error::NoClipsFound(root.into()));
    }
    Ok(out)
}

fn plan_jobs(hr_root: &Path, cfg: &PipelineConfig) -> Result<Vec<GroupJob>> {
    let mut jobs = Vec::new();
    for dir in discover_clips(hr_root)? {
        let ClipMeta { frame_rate, count } = read_clip_meta(&dir)?;
        if count < cfg.group_len {
            return Err(Error::ClipTooShort {
                path: dir,
                frames: count,
                group_len: cfg.group_len,
            });
        }
        let rel = dir.strip_prefix(hr_root).unwrap_or(&dir);
        let source_clip = if rel.as_os_str().is_empty() { ".".to_owned() } else { rel.to_string_lossy().into_owned() };
        let mut start = 0;
        while start + cfg.group_len <= count {
            jobs.push(GroupJob {
                index: jobs.len() as u64,
                clip_dir: dir.clone(),
                source_clip: source_clip.clone(),
                start_frame: start,
                frame_rate,
            });
            start += cfg.stride();
        }
    }
    Ok(jobs)
}

fn group_dir(index: u64) -> String {
    format!("groups/{index:06}")
}

fn build_group(job: &GroupJob, planner: &Planner, seed: u64) -> Result<(PairGroup, ManifestEntry)> {
    let cfg = planner.config();
    let patch = cfg.patch_size();
    let mut rng = stream(&[seed, job.index, tag::CROP]);

    let frames = (job.start_frame..job.start_frame + cfg.group_len)
        .map(|i| read_frame(job.clip_dir.join(frame_file_name(i))))
        .collect::<Result<Vec<_>>>()?;
    let (h, w) = frames[0].dims();
    if frames.iter().any(|f| f.dims() != (h, w)) {
        return Err(Error::InvalidFrame(format!("{}: frame sizes differ", job.clip_dir.display())));
    }
    if h < patch || w < patch {
        return Err(Error::DimensionMismatch(format!(
            "{}: {h}x{w} frames are smaller than the {patch}x{patch} patch",
            job.clip_dir.display()
        )));
    }
    let crop = CropWindow {
        top: rng.random_range(0..=h - patch),
        left: rng.random_range(0..=w - patch),
        size: patch,
    };
    let (flip_h, flip_v) = if cfg.flip_augment {
        (rng.random_bool(0.5), rng.random_bool(0.5))
    } else {
        (false, false)
    };
    let patches = frames
        .iter()
        .map(|f| {
            let mut p = f.crop(crop.top, crop.left, patch, patch)?;
            if flip_h {
                p = p.flip_horizontal();
            }
            if flip_v {
                p = p.flip_vertical();
            }
            Ok(p)
        })
        .collect::<Result<Vec<Frame>>>()?;
    let hr = Clip::new(patches, job.frame_rate)?;

    let plan = planner.sample(seed, job.index);
    let lr = apply_plan(&hr, &plan)?;
    let dir = group_dir(job.index);
    let entry = ManifestEntry {
        index: job.index,
        hr_dir: format!("{dir}/hr"),
        lr_dir: format!("{dir}/lr"),
        source_clip: job.source_clip.clone(),
        start_frame: job.start_frame,
        crop,
        flip_horizontal: flip_h,
        flip_vertical: flip_v,
        plan: plan.clone(),
    };
    Ok((PairGroup { hr, lr, plan }, entry))
}

/// `write_clip` with the frames encoded in parallel.
fn write_clip_parallel(clip: &Clip, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    clip.frames()
        .par_iter()
        .enumerate()
        .try_for_each(|(i, f)| write_frame(f, dir.join(frame_file_name(i))))?;
    let meta = ClipMeta {
        frame_rate: clip.frame_rate(),
        count: clip.len(),
    };
    let path = dir.join(CLIP_META_FILE);
    let text = serde_json::to_string_pretty(&meta).expect("clip meta serializes");
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

fn write_group(out_root: &Path, group: &PairGroup, entry: &ManifestEntry) -> Result<()> {
    write_clip_parallel(&group.hr, &out_root.join(&entry.hr_dir))?;
    write_clip_parallel(&group.lr, &out_root.join(&entry.lr_dir))
}

/// Cuts every clip under `hr_root` into patch groups, degrades each group by
/// its own plan and writes `groups/NNNNNN/{hr,lr}` plus `manifest.json` under
/// `out_root`. The bytes written depend only on the inputs, `cfg` and
/// `seed`, not on `workers`.
pub fn synthesize_dataset(
    hr_root: impl AsRef<Path>,
    out_root: impl AsRef<Path>,
    cfg: &PipelineConfig,
    seed: u64,
    workers: usize,
) -> Result<Manifest> {
    let (hr_root, out_root) = (hr_root.as_ref(), out_root.as_ref());
    let planner = Planner::new(cfg)?;
    let jobs = plan_jobs(hr_root, cfg)?;
    fs::create_dir_all(out_root).map_err(|e| Error::io(out_root, e))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
    let queue = ShuffleQueue::new(cfg.queue_size)?;

    let (produced, written) = std::thread::scope(|scope| {
        let writer = scope.spawn(|| {
            let mut rng = stream(&[seed, tag::QUEUE]);
            let mut entries = Vec::with_capacity(jobs.len());
            let mut first_err = None;
            loop {
                let batch = queue.pop_batch(cfg.batch_groups, &mut rng);
                if batch.is_empty() {
                    break;
                }
                for (group, entry) in batch {
                    if first_err.is_some() {
                        continue;
                    }
                    match pool.install(|| write_group(out_root, &group, &entry)) {
                        Ok(()) => entries.push(entry),
                        Err(e) => first_err = Some(e),
                    }
                }
            }
            match first_err {
                Some(e) => Err(e),
                None => Ok(entries),
            }
        });
        let produced = pool.install(|| {
            jobs.par_iter().try_for_each(|job| {
                let item = build_group(job, &planner, seed)?;
                queue.push(item);
                Ok(())
            })
        });
        queue.close();
        (produced, writer.join().expect("writer thread panicked"))
    });
    produced?;
    let mut groups = written?;
    groups.sort_by_key(|e| e.index);

    let manifest = Manifest {
        seed,
        config: cfg.resolved(),
        groups,
    };
    let path = out_root.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::media::{read_clip, write_clip};

    fn small_cfg() -> PipelineConfig {
        PipelineConfig {
            patch_size: Some(48),
            group_len: 4,
            queue_size: 8,
            ..Default::default()
        }
    }

    fn tree_bytes(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
        let mut out = Vec::new();
        let mut stack = vec![root.to_path_buf()];
        while let Some(d) = stack.pop() {
            for e in fs::read_dir(&d).unwrap() {
                let p = e.unwrap().path();
                if p.is_dir() {
                    stack.push(p);
                } else {
                    out.push((p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap()));
                }
            }
        }
        out.sort();
        out
    }

    #[test]
    fn empty_root_has_no_clips() {
        let dir = tempfile::tempdir().unwrap();
        let out = tempfile::tempdir().unwrap();
        let err = synthesize_dataset(dir.path(), out.path(), &small_cfg(), 0, 1).unwrap_err();
        assert!(matches!(err, Error::NoClipsFound(_)));
        let err = synthesize_dataset(dir.path().join("missing"), out.path(), &small_cfg(), 0, 1).unwrap_err();
        assert!(matches!(err, Error::NoClipsFound(_)));
    }

    #[test]
    fn short_clip_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_clip(&fixtures::natural_clip(32, 32, 3, 0), dir.path().join("a")).unwrap();
        let out = tempfile::tempdir().unwrap();
        let err = synthesize_dataset(dir.path(), out.path(), &small_cfg(), 0, 1).unwrap_err();
        assert!(matches!(err, Error::ClipTooShort { frames: 3, group_len: 4, .. }));
    }

    #[test]
    fn groups_follow_stride_and_outputs_match_manifest() {
        let dir = tempfile::tempdir().unwrap();
        write_clip(&fixtures::natural_clip(56, 64, 10, 1), dir.path().join("b")).unwrap();
        write_clip(&fixtures::natural_clip(48, 52, 8, 2), dir.path().join("a")).unwrap();
        let out = tempfile::tempdir().unwrap();
        let m = synthesize_dataset(dir.path(), out.path(), &small_cfg(), 5, 2).unwrap();
        // a: 8 frames -> 2 groups, b: 10 frames -> 2 groups.
        assert_eq!(m.groups.len(), 4);
        assert_eq!(m.groups.iter().map(|g| g.index).collect::<Vec<_>>(), [0, 1, 2, 3]);
        assert_eq!(m.groups[0].source_clip, "a");
        assert_eq!(m.groups[3].start_frame, 4);
        assert_eq!(Manifest::load(out.path().join(MANIFEST_FILE)).unwrap(), m);
        for g in &m.groups {
            let hr = read_clip(out.path().join(&g.hr_dir)).unwrap();
            let lr = read_clip(out.path().join(&g.lr_dir)).unwrap();
            assert_eq!((hr.len(), lr.len()), (4, 4));
            assert_eq!(hr.dims(), (48, 48));
            assert_eq!(lr.dims(), (24, 24));
            // Re-applying the stored plan to the stored HR reproduces LR.
            let again = apply_plan(&hr, &g.plan).unwrap();
            let lr_dir = tempfile::tempdir().unwrap();
            write_clip(&again, lr_dir.path()).unwrap();
            assert_eq!(tree_bytes(lr_dir.path()), tree_bytes(&out.path().join(&g.lr_dir)));
        }
    }

    #[test]
    fn worker_count_does_not_change_bytes() {
        let dir = tempfile::tempdir().unwrap();
        write_clip(&fixtures::natural_clip(52, 52, 12, 3), dir.path().join("c")).unwrap();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        synthesize_dataset(dir.path(), a.path(), &small_cfg(), 9, 1).unwrap();
        synthesize_dataset(dir.path(), b.path(), &small_cfg(), 9, 4).unwrap();
        assert_eq!(tree_bytes(a.path()), tree_bytes(b.path()));
    }

    #[test]
    fn patch_larger_than_frames_is_a_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        write_clip(&fixtures::natural_clip(40, 40, 4, 0), dir.path()).unwrap();
        let out = tempfile::tempdir().unwrap();
        let err = synthesize_dataset(dir.path(), out.path(), &small_cfg(), 0, 1).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }
}
