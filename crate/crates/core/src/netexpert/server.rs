//! Profile store and the TCP server answering publish and expert queries.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::thread::{self, JoinHandle};

use log::{debug, info, warn};

use super::protocol::Message;
use super::{ExpertAnswer, ExpertiseProfile};
use crate::error::{Error, Result};

type Profiles = BTreeMap<String, ExpertiseProfile>;

/// Copy-on-write map of published profiles. Readers clone an `Arc` to the
/// current snapshot; writers are serialized and swap in a new map.
#[derive(Debug, Default)]
pub struct ProfileStore {
    snapshot: RwLock<Arc<Profiles>>,
    writer: Mutex<()>,
    persist: Option<PathBuf>,
}

impl ProfileStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Store backed by `path`, loading the profiles already saved there.
    pub fn persistent(path: &Path) -> Result<Self> {
        let mut profiles = Profiles::new();
        if path.exists() {
            let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
            for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                let err = |msg: String| Error::Format { path: path.to_path_buf(), line: n + 1, msg };
                match Message::from_line(line).map_err(|e| err(e.to_string()))? {
                    Message::Publish { user, terms } => {
                        let p = ExpertiseProfile { user, terms };
                        p.validate().map_err(|e| err(e.to_string()))?;
                        profiles.insert(p.user.clone(), p);
                    }
                    other => return Err(err(format!("unexpected record {other:?}"))),
                }
            }
        }
        Ok(ProfileStore {
            snapshot: RwLock::new(Arc::new(profiles)),
            writer: Mutex::new(()),
            persist: Some(path.to_path_buf()),
        })
    }

    pub fn snapshot(&self) -> Arc<Profiles> {
        self.snapshot.read().expect("snapshot lock").clone()
    }

    /// Replaces the user's profile.
    pub fn publish(&self, profile: ExpertiseProfile) -> Result<()> {
        profile.validate()?;
        let _guard = self.writer.lock().expect("writer lock");
        let mut next = (*self.snapshot()).clone();
        next.insert(profile.user.clone(), profile);
        if let Some(path) = &self.persist {
            save(path, &next)?;
        }
        *self.snapshot.write().expect("snapshot lock") = Arc::new(next);
        Ok(())
    }

    pub fn experts(&self, terms: &[String]) -> ExpertAnswer {
        ExpertAnswer::from_profiles(self.snapshot().values(), terms)
    }

    pub fn len(&self) -> usize {
        self.snapshot().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn save(path: &Path, profiles: &Profiles) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let io = |e| Error::io(format!("writing {}", tmp.display()), e);
    let mut w = BufWriter::new(File::create(&tmp).map_err(io)?);
    for p in profiles.values() {
        let line = Message::Publish { user: p.user.clone(), terms: p.terms.clone() }.to_line();
        w.write_all(line.as_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)?;
    drop(w);
    fs::rename(&tmp, path).map_err(|e| Error::io(format!("replacing {}", path.display()), e))
}

fn respond(store: &ProfileStore, request: Result<Message>) -> Message {
    match request {
        Ok(Message::Publish { user, terms }) => match store.publish(ExpertiseProfile { user, terms }) {
            Ok(()) => Message::Ack,
            Err(e) => Message::Error { msg: e.to_string() },
        },
        Ok(Message::Experts { terms }) => Message::Answer { per_term: store.experts(&terms).per_term },
        Ok(other) => Message::Error { msg: format!("unexpected request {other:?}") },
        Err(e) => Message::Error { msg: e.to_string() },
    }
}

fn serve_connection(stream: TcpStream, store: &ProfileStore) -> std::io::Result<()> {
    let peer = stream.peer_addr().ok();
    let mut writer = stream.try_clone()?;
    for line in BufReader::new(stream).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = respond(store, Message::from_line(&line));
        writer.write_all(reply.to_line().as_bytes())?;
        writer.flush()?;
    }
    debug!("connection from {peer:?} closed");
    Ok(())
}

pub struct ExpertServer {
    listener: TcpListener,
    store: Arc<ProfileStore>,
}

impl ExpertServer {
    pub fn bind<A: ToSocketAddrs>(addr: A, store: ProfileStore) -> Result<Self> {
        let listener = TcpListener::bind(addr).map_err(|e| Error::io("binding expertise server", e))?;
        Ok(ExpertServer { listener, store: Arc::new(store) })
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        self.listener.local_addr().map_err(|e| Error::io("reading local address", e))
    }

    pub fn store(&self) -> Arc<ProfileStore> {
        self.store.clone()
    }

    /// Serves until `stop` is set; one thread per connection.
    fn run(self, stop: Arc<AtomicBool>) {
        for conn in self.listener.incoming() {
            if stop.load(Ordering::SeqCst) {
                break;
            }
            match conn {
                Ok(stream) => {
                    let store = self.store.clone();
                    thread::spawn(move || {
                        if let Err(e) = serve_connection(stream, &store) {
                            debug!("connection ended: {e}");
                        }
                    });
                }
                Err(e) => warn!("accept failed: {e}"),
            }
        }
    }

    /// Blocks serving forever.
    pub fn serve(self) -> Result<()> {
        info!("expertise server listening on {}", self.local_addr()?);
        self.run(Arc::new(AtomicBool::new(false)));
        Ok(())
    }

    /// Serves on a background thread.
    pub fn spawn(self) -> Result<ServerHandle> {
        let addr = self.local_addr()?;
        let store = self.store.clone();
        let stop = Arc::new(AtomicBool::new(false));
        let flag = stop.clone();
        let thread = thread::spawn(move || self.run(flag));
        Ok(ServerHandle { addr, store, stop, thread: Some(thread) })
    }
}

pub struct ServerHandle {
    addr: SocketAddr,
    store: Arc<ProfileStore>,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn store(&self) -> &ProfileStore {
        &self.store
    }

    pub fn shutdown(mut self) {
        self.stop_now();
    }

    fn stop_now(&mut self) {
        if let Some(t) = self.thread.take() {
            self.stop.store(true, Ordering::SeqCst);
            // wake the blocking accept
            let _ = TcpStream::connect(self.addr);
            let _ = t.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.stop_now();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(user: &str, terms: &[(&str, f64)]) -> ExpertiseProfile {
        ExpertiseProfile { user: user.into(), terms: terms.iter().map(|(t, w)| (t.to_string(), *w)).collect() }
    }

    #[test]
    fn replace_semantics_and_rejection() {
        let s = ProfileStore::in_memory();
        s.publish(profile("a", &[("gas", 0.4)])).unwrap();
        s.publish(profile("a", &[("power", 0.2)])).unwrap();
        assert!(s.experts(&["gas".into()]).per_term["gas"].is_empty());
        assert_eq!(s.experts(&["power".into()]).per_term["power"], vec![("a".to_string(), 0.2)]);
        assert!(s.publish(profile("b", &[("gas", -1.0)])).is_err());
        assert!(s.publish(profile("b", &[("gas", f64::NAN)])).is_err());
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn persistence_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profiles.ndjson");
        let s = ProfileStore::persistent(&path).unwrap();
        s.publish(profile("a", &[("gas", 0.25)])).unwrap();
        s.publish(profile("b", &[("gas", 0.5)])).unwrap();
        let back = ProfileStore::persistent(&path).unwrap();
        assert_eq!(*back.snapshot(), *s.snapshot());
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.lines().all(|l| l.starts_with("{\"type\":\"publish\"")));
    }
}
