use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Channel, DispatchConfig, DispatchError};
use crate::grid::SelectionEvent;

/// What a channel actually carries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Payload {
    Text(String),
    /// Call script the phone provider reads out.
    File(PathBuf),
    /// Pre-recorded audio to play; no audio is produced here.
    Play(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("missing audio")]
    MissingAudio,
}

pub fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn fill(template: &str, label: &str) -> String {
    template.replace("{label}", label)
}

/// Directory of `{label}.xml` call scripts.
pub struct MessageStore;

impl MessageStore {
    pub fn path_for(dir: &Path, label: &str) -> PathBuf {
        dir.join(format!("{label}.xml"))
    }

    /// Writes `<Response><Say>..</Say></Response>` for every label lacking one.
    pub fn ensure(dir: &Path, labels: &[Arc<str>], template: &str) -> Result<(), DispatchError> {
        let err = |source| DispatchError::MessageStore {
            path: dir.to_path_buf(),
            source,
        };
        fs::create_dir_all(dir).map_err(err)?;
        for label in labels {
            let path = Self::path_for(dir, label);
            if path.exists() {
                continue;
            }
            let body = format!(
                "<Response><Say>{}</Say></Response>\n",
                xml_escape(&fill(template, label))
            );
            fs::write(&path, body).map_err(err)?;
        }
        Ok(())
    }
}

fn find_audio(dir: &Path, label: &str) -> Option<PathBuf> {
    let mut hits: Vec<PathBuf> = fs::read_dir(dir)
        .ok()?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_file() && p.file_stem().is_some_and(|s| s == label))
        .collect();
    hits.sort();
    hits.into_iter().next()
}

pub fn render_message(
    selection: &SelectionEvent,
    channel: Channel,
    config: &DispatchConfig,
) -> Result<Payload, RenderError> {
    let label = &*selection.label;
    match channel {
        Channel::Email | Channel::Sms => Ok(Payload::Text(fill(&config.template, label))),
        Channel::Phone => Ok(Payload::File(MessageStore::path_for(&config.message_store_dir, label))),
        Channel::Voice => find_audio(&config.voice_dir, label)
            .map(Payload::Play)
            .ok_or(RenderError::MissingAudio),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{OptionGrid, DEFAULT_LABELS};
    use crate::model::ScreenConfig;

    fn selection(label: &str) -> SelectionEvent {
        let g = OptionGrid::with_default_labels(ScreenConfig::default());
        g.make_selection(g.cell_of(label).unwrap().index(), 0.0, 0).unwrap()
    }

    #[test]
    fn text_channels_use_template() {
        let cfg = DispatchConfig::default();
        let p = render_message(&selection("Nurse"), Channel::Sms, &cfg).unwrap();
        assert_eq!(p, Payload::Text("Patient requests: Nurse".into()));
        let p = render_message(&selection("Nurse"), Channel::Email, &cfg).unwrap();
        assert_eq!(p, Payload::Text("Patient requests: Nurse".into()));
    }

    #[test]
    fn phone_points_at_call_script() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = DispatchConfig {
            message_store_dir: dir.path().to_path_buf(),
            ..DispatchConfig::default()
        };
        let labels: Vec<Arc<str>> = DEFAULT_LABELS.iter().map(|&l| Arc::from(l)).collect();
        MessageStore::ensure(dir.path(), &labels, &cfg.template).unwrap();
        let p = render_message(&selection("Emergency"), Channel::Phone, &cfg).unwrap();
        assert_eq!(p, Payload::File(dir.path().join("Emergency.xml")));
        let xml = fs::read_to_string(dir.path().join("Emergency.xml")).unwrap();
        assert_eq!(xml, "<Response><Say>Patient requests: Emergency</Say></Response>\n");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 9);
    }

    #[test]
    fn existing_call_script_is_kept() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("Water.xml"), "custom").unwrap();
        MessageStore::ensure(dir.path(), &[Arc::from("Water")], "x {label}").unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("Water.xml")).unwrap(), "custom");
    }

    #[test]
    fn voice_needs_audio() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = DispatchConfig {
            voice_dir: dir.path().to_path_buf(),
            ..DispatchConfig::default()
        };
        assert_eq!(
            render_message(&selection("Water"), Channel::Voice, &cfg),
            Err(RenderError::MissingAudio)
        );
        fs::write(dir.path().join("Water.wav"), b"RIFF").unwrap();
        assert_eq!(
            render_message(&selection("Water"), Channel::Voice, &cfg).unwrap(),
            Payload::Play(dir.path().join("Water.wav"))
        );
    }

    #[test]
    fn escapes_markup() {
        assert_eq!(xml_escape("a<b & 'c'"), "a&lt;b &amp; &apos;c&apos;");
    }
}
