//! In-memory sandboxed filesystem owned by one engine.
//!
//! Paths are flat keys using `/` as separator. A leading `/`, empty
//! segments and `.` segments are normalised away; `..`, backslashes and
//! NUL bytes are rejected.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VfsError {
    #[error("invalid path {0:?}")]
    InvalidPath(String),
    #[error("file not found: {0}")]
    NotFound(String),
}

/// Normalises `path` into its sandbox key.
pub fn normalize(path: &str) -> Result<String, VfsError> {
    let bad = || VfsError::InvalidPath(path.to_owned());
    if path.contains('\\') || path.contains('\0') {
        return Err(bad());
    }
    let mut parts = Vec::new();
    for seg in path.split('/') {
        match seg {
            "" | "." => {}
            ".." => return Err(bad()),
            s => parts.push(s),
        }
    }
    if parts.is_empty() {
        return Err(bad());
    }
    Ok(parts.join("/"))
}

#[derive(Debug, Clone, Default)]
pub struct Vfs {
    files: BTreeMap<String, Vec<u8>>,
}

impl Vfs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn write(&mut self, path: &str, bytes: Vec<u8>) -> Result<(), VfsError> {
        let key = normalize(path)?;
        self.files.insert(key, bytes);
        Ok(())
    }

    pub fn read(&self, path: &str) -> Result<&[u8], VfsError> {
        let key = normalize(path)?;
        self.files
            .get(&key)
            .map(Vec::as_slice)
            .ok_or(VfsError::NotFound(key))
    }

    /// Entries whose normalised path starts with `prefix`, sorted by path.
    pub fn list(&self, prefix: &str) -> Vec<(String, usize)> {
        self.files
            .range(prefix.to_owned()..)
            .take_while(|(k, _)| k.starts_with(prefix))
            .map(|(k, v)| (k.clone(), v.len()))
            .collect()
    }

    pub fn remove(&mut self, path: &str) -> Result<Vec<u8>, VfsError> {
        let key = normalize(path)?;
        self.files.remove(&key).ok_or(VfsError::NotFound(key))
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn write_then_list() {
        let mut fs = Vfs::new();
        fs.write("a.orc", b"instr 1\nendin".to_vec()[..12].to_vec()).unwrap();
        assert_eq!(fs.list(""), vec![("a.orc".to_string(), 12)]);
    }

    #[test]
    fn escapes_rejected() {
        let mut fs = Vfs::new();
        for p in ["../x", "a/../../b", "", "/", "a\\b", "a\0b", "./.."] {
            assert!(matches!(fs.write(p, vec![1]), Err(VfsError::InvalidPath(_))), "{p:?}");
        }
        assert!(fs.is_empty());
    }

    #[test]
    fn normalisation() {
        assert_eq!(normalize("/a//b/./c").unwrap(), "a/b/c");
        let mut fs = Vfs::new();
        fs.write("/x/y", vec![1, 2]).unwrap();
        assert_eq!(fs.read("x/y").unwrap(), &[1, 2]);
    }

    #[test]
    fn overwrite_keeps_single_entry() {
        let mut fs = Vfs::new();
        fs.write("f", vec![1]).unwrap();
        fs.write("f", vec![2, 3]).unwrap();
        assert_eq!(fs.list(""), vec![("f".to_string(), 2)]);
        assert_eq!(fs.read("f").unwrap(), &[2, 3]);
    }

    #[test]
    fn not_found() {
        let fs = Vfs::new();
        assert!(matches!(fs.read("nope"), Err(VfsError::NotFound(_))));
        assert!(fs.list("").is_empty());
    }

    #[test]
    fn prefix_listing() {
        let mut fs = Vfs::new();
        fs.write("b/c", vec![0; 3]).unwrap();
        fs.write("a", vec![0; 1]).unwrap();
        fs.write("bb", vec![0; 2]).unwrap();
        assert_eq!(fs.list("b/"), vec![("b/c".to_string(), 3)]);
        assert_eq!(
            fs.list(""),
            vec![("a".to_string(), 1), ("b/c".to_string(), 3), ("bb".to_string(), 2)]
        );
    }

    proptest! {
        #[test]
        fn binary_round_trip(bytes in proptest::collection::vec(any::<u8>(), 0..512), name in "[a-z]{1,8}(/[a-z0-9]{1,8}){0,2}") {
            let mut fs = Vfs::new();
            fs.write(&name, bytes.clone()).unwrap();
            prop_assert_eq!(fs.read(&name).unwrap(), &bytes[..]);
        }
    }
}
