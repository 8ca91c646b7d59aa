//! Transcript TSV: header `word<TAB>onset_s<TAB>offset_s`, one word per line.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::dataio::container::write_atomic;
use crate::error::{Error, Result};
use crate::featurespace::{StoryTranscript, Word};

pub const TRANSCRIPT_HEADER: &str = "word\tonset_s\toffset_s";

/// Reads a transcript; the story id is the file stem.
pub fn parse_transcript(path: &Path) -> Result<StoryTranscript> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let story_id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_transcript_str(&text, &story_id, path)
}

pub fn parse_transcript_str(text: &str, story_id: &str, path: &Path) -> Result<StoryTranscript> {
    let parse_err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    match lines.next() {
        Some((_, h)) if h == TRANSCRIPT_HEADER => {}
        Some((n, h)) => {
            return Err(parse_err(n, format!("expected header {TRANSCRIPT_HEADER:?}, found {h:?}")))
        }
        None => return Err(parse_err(1, "empty file".into())),
    }
    let mut words: Vec<Word> = Vec::new();
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(parse_err(n, format!("expected 3 tab-separated fields, found {}", fields.len())));
        }
        let num = |s: &str, name: &str| -> Result<f64> {
            let v: f64 =
                s.trim().parse().map_err(|_| parse_err(n, format!("{name} {s:?} is not a number")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(parse_err(n, format!("{name} is not finite")))
            }
        };
        let onset_s = num(fields[1], "onset_s")?;
        let offset_s = num(fields[2], "offset_s")?;
        if let Some(prev) = words.last() {
            if onset_s < prev.onset_s {
                return Err(Error::Validation(format!(
                    "{}:{n}: onset {onset_s} is earlier than the previous onset {}",
                    path.display(),
                    prev.onset_s
                )));
            }
        }
        if offset_s < onset_s {
            return Err(Error::Validation(format!(
                "{}:{n}: offset {offset_s} precedes onset {onset_s}",
                path.display()
            )));
        }
        words.push(Word { text: fields[0].to_string(), onset_s, offset_s });
    }
    StoryTranscript::new(story_id, words)
}

pub fn write_transcript(path: &Path, transcript: &StoryTranscript) -> Result<()> {
    let mut out = String::from(TRANSCRIPT_HEADER);
    out.push('\n');
    for w in &transcript.words {
        if w.text.contains(['\t', '\n']) {
            return Err(Error::Input(format!("word {:?} contains a tab or newline", w.text)));
        }
        writeln!(out, "{}\t{}\t{}", w.text, w.onset_s, w.offset_s).expect("write to string");
    }
    write_atomic(path, out.as_bytes())
}
