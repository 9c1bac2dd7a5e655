use std::path::Path;
use std::process::Command;

use crate::media::{read_frame, write_clip, Clip};
use crate::{Error, Result};

fn decoded_frames(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
        .collect();
    paths.sort();
    Ok(paths)
}

/// Round-trips `clip` through a user-supplied shell command.
pub(crate) fn run_external(clip: &Clip, template: &str, bitrate: f64) -> Result<Clip> {
    let tmp = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;
    let input = tmp.path().join("input");
    let output = tmp.path().join("output");
    write_clip(clip, &input)?;
    std::fs::create_dir_all(&output).map_err(|e| Error::io(&output, e))?;

    let command = template
        .replace("{input}", &input.to_string_lossy())
        .replace("{output}", &output.to_string_lossy())
        .replace("{bitrate}", &format!("{}", bitrate.round() as u64));
    let result = Command::new("sh")
        .arg("-c")
        .arg(&command)
        .current_dir(tmp.path())
        .output()
        .map_err(|e| Error::ExternalCodecFailure(format!("could not spawn sh: {e}")))?;
    if !result.status.success() {
        let stderr = String::from_utf8_lossy(&result.stderr);
        let tail: String = stderr.lines().rev().take(5).collect::<Vec<_>>().into_iter().rev().collect::<Vec<_>>().join("\n");
        return Err(Error::ExternalCodecFailure(format!("`{command}` exited with {}: {tail}", result.status)));
    }

    let paths = decoded_frames(&output)?;
    if paths.len() != clip.len() {
        return Err(Error::ExternalCodecFailure(format!(
            "expected {} decoded frames, found {}",
            clip.len(),
            paths.len()
        )));
    }
    let frames = paths.iter().map(read_frame).collect::<Result<Vec<_>>>()?;
    if frames.iter().any(|f| f.dims() != clip.dims()) {
        return Err(Error::ExternalCodecFailure("decoded frame size differs from input".into()));
    }
    Clip::new(frames, clip.frame_rate())
}
