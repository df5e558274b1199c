use std::path::{Path, PathBuf};

use log::warn;
use walkdir::WalkDir;

use super::{parse_email, Email};
use crate::error::{Error, Result};

/// Folders read per user when nothing else is requested.
pub const DEFAULT_FOLDERS: [&str; 2] = ["inbox", "sent_items"];

#[derive(Debug, Clone)]
pub enum IngestFilter {
    All,
    /// Only files below a directory with one of these names.
    Folders(Vec<String>),
}

impl Default for IngestFilter {
    fn default() -> Self {
        IngestFilter::Folders(DEFAULT_FOLDERS.iter().map(|s| s.to_string()).collect())
    }
}

impl IngestFilter {
    /// The folder name that admits `relative`, if any.
    fn admit(&self, relative: &Path) -> Option<String> {
        let dirs: Vec<String> = relative
            .parent()
            .into_iter()
            .flat_map(|p| p.components())
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect();
        match self {
            IngestFilter::All => Some(dirs.last().cloned().unwrap_or_default()),
            IngestFilter::Folders(names) => {
                dirs.into_iter().find(|d| names.iter().any(|n| n.eq_ignore_ascii_case(d)))
            }
        }
    }
}

#[derive(Debug, Default)]
pub struct Collected {
    pub emails: Vec<Email>,
    pub skipped: Vec<(PathBuf, String)>,
}

/// Walks a maildir-style tree and parses every admitted file, sorted by
/// path. Files that fail to parse are reported in `skipped`.
pub fn collect_emails(root: &Path, filter: &IngestFilter) -> Result<Collected> {
    let meta = std::fs::metadata(root).map_err(|e| Error::io(root.display().to_string(), e))?;
    if !meta.is_dir() {
        return Err(Error::io(
            root.display().to_string(),
            std::io::Error::new(std::io::ErrorKind::InvalidInput, "not a directory"),
        ));
    }
    let mut out = Collected::default();
    let walker = WalkDir::new(root).sort_by_file_name().into_iter().filter_entry(|e| {
        e.depth() == 0 || !e.file_name().to_string_lossy().starts_with('.')
    });
    for entry in walker {
        let entry = entry.map_err(|e| {
            let path = e.path().map(|p| p.display().to_string()).unwrap_or_default();
            Error::io(path, e.into())
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let relative = entry.path().strip_prefix(root).unwrap_or(entry.path());
        let Some(folder) = filter.admit(relative) else { continue };
        let raw = std::fs::read(entry.path()).map_err(|e| Error::io(entry.path().display().to_string(), e))?;
        match parse_email(entry.path(), &raw) {
            Ok(mut email) => {
                email.folder = folder;
                out.emails.push(email);
            }
            Err(err) => {
                warn!("skipping {}: {err}", entry.path().display());
                out.skipped.push((entry.path().to_path_buf(), err.to_string()));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_filter_picks_principal_folders() {
        let f = IngestFilter::default();
        assert_eq!(f.admit(Path::new("allen-p/inbox/1.")).as_deref(), Some("inbox"));
        assert_eq!(f.admit(Path::new("allen-p/sent_items/1.")).as_deref(), Some("sent_items"));
        assert_eq!(f.admit(Path::new("allen-p/deleted_items/1.")), None);
        assert_eq!(f.admit(Path::new("1.")), None);
        assert_eq!(IngestFilter::All.admit(Path::new("a/b/1.")).as_deref(), Some("b"));
    }

    #[test]
    fn walks_and_skips_bad_files() {
        let dir = tempfile::tempdir().unwrap();
        let inbox = dir.path().join("u/inbox");
        std::fs::create_dir_all(&inbox).unwrap();
        std::fs::create_dir_all(dir.path().join("u/notes")).unwrap();
        std::fs::write(inbox.join("1."), "Subject: a\n\nbody").unwrap();
        std::fs::write(inbox.join("2."), "no separator here").unwrap();
        std::fs::write(dir.path().join("u/notes/3."), "Subject: b\n\nbody").unwrap();
        let got = collect_emails(dir.path(), &IngestFilter::default()).unwrap();
        assert_eq!(got.emails.len(), 1);
        assert_eq!(got.emails[0].folder, "inbox");
        assert_eq!(got.skipped.len(), 1);
    }

    #[test]
    fn missing_root_is_error() {
        assert!(collect_emails(Path::new("/nonexistent/maildir"), &IngestFilter::All).is_err());
    }
}
