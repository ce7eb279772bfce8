//! Thread-per-connection TCP server over a shared read-only engine.

use std::io::{self, ErrorKind, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use super::{handle_frame, Response, MAX_FRAME_BYTES};
use crate::engine::Engine;
use crate::scalar::Scalar;

const POLL: Duration = Duration::from_millis(50);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerConfig {
    pub max_frame: usize,
    /// Connections with no incoming bytes for this long are closed.
    pub idle_timeout: Duration,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig { max_frame: MAX_FRAME_BYTES, idle_timeout: Duration::from_secs(30) }
    }
}

/// Running server. Dropping the handle does not stop it; call [`ServerHandle::shutdown`].
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    acceptor: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Flag that stops the server when set; suitable for signal handlers.
    pub fn stop_flag(&self) -> Arc<AtomicBool> {
        Arc::clone(&self.stop)
    }

    /// Stop accepting, let open connections answer the frames already
    /// received, then join every thread.
    pub fn shutdown(mut self) {
        self.stop.store(true, Ordering::SeqCst);
        self.join_inner();
    }

    /// Block until the stop flag is set elsewhere and the server has drained.
    pub fn join(mut self) {
        self.join_inner();
    }

    fn join_inner(&mut self) {
        if let Some(h) = self.acceptor.take() {
            let _ = h.join();
        }
    }
}

/// Bind and start serving in background threads.
pub fn serve<S: Scalar, A: ToSocketAddrs>(engine: Arc<Engine<S>>, addr: A, cfg: ServerConfig) -> io::Result<ServerHandle> {
    let listener = TcpListener::bind(addr)?;
    listener.set_nonblocking(true)?;
    let addr = listener.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let flag = Arc::clone(&stop);
    let acceptor = thread::Builder::new().name("expert-accept".into()).spawn(move || {
        let mut workers: Vec<JoinHandle<()>> = Vec::new();
        while !flag.load(Ordering::SeqCst) {
            match listener.accept() {
                Ok((stream, peer)) => {
                    log::debug!("connection from {peer}");
                    let (engine, flag, cfg) = (Arc::clone(&engine), Arc::clone(&flag), cfg.clone());
                    match thread::Builder::new().name(format!("expert-conn-{peer}")).spawn(move || {
                        if let Err(e) = connection(stream, &engine, &flag, &cfg) {
                            log::debug!("connection {peer} ended: {e}");
                        }
                    }) {
                        Ok(h) => workers.push(h),
                        Err(e) => log::error!("cannot spawn connection thread: {e}"),
                    }
                    workers.retain(|h| !h.is_finished());
                }
                Err(e) if e.kind() == ErrorKind::WouldBlock => thread::sleep(POLL),
                Err(e) => {
                    log::warn!("accept failed: {e}");
                    thread::sleep(POLL);
                }
            }
        }
        for h in workers {
            let _ = h.join();
        }
    })?;
    Ok(ServerHandle { addr, stop, acceptor: Some(acceptor) })
}

fn write_response(out: &mut Vec<u8>, resp: &Response) {
    serde_json::to_writer(&mut *out, resp).expect("response serializes");
    out.push(b'\n');
}

fn connection<S: Scalar>(mut stream: TcpStream, engine: &Engine<S>, stop: &AtomicBool, cfg: &ServerConfig) -> io::Result<()> {
    stream.set_nonblocking(false)?;
    stream.set_read_timeout(Some(POLL))?;
    stream.set_nodelay(true)?;
    let mut buf: Vec<u8> = Vec::new();
    let mut chunk = vec![0u8; 64 * 1024];
    let mut discarding = false;
    let mut last_activity = Instant::now();
    loop {
        let mut out = Vec::new();
        let mut scanned = 0;
        while let Some(pos) = buf[scanned..].iter().position(|&b| b == b'\n').map(|p| p + scanned) {
            let frame = &buf[scanned..pos];
            if discarding {
                discarding = false;
            } else if frame.len() > cfg.max_frame {
                write_response(&mut out, &Response::error(None, format!("frame exceeds {} bytes", cfg.max_frame)));
            } else if !frame.iter().all(u8::is_ascii_whitespace) {
                write_response(&mut out, &handle_frame(engine, frame));
            }
            scanned = pos + 1;
        }
        buf.drain(..scanned);
        if !discarding && buf.len() > cfg.max_frame {
            write_response(&mut out, &Response::error(None, format!("frame exceeds {} bytes", cfg.max_frame)));
            discarding = true;
        }
        if discarding {
            buf.clear();
        }
        if !out.is_empty() {
            stream.write_all(&out)?;
        }
        if stop.load(Ordering::SeqCst) {
            return Ok(());
        }
        match stream.read(&mut chunk) {
            Ok(0) => return Ok(()),
            Ok(n) => {
                buf.extend_from_slice(&chunk[..n]);
                last_activity = Instant::now();
            }
            Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut | ErrorKind::Interrupted) => {
                if last_activity.elapsed() >= cfg.idle_timeout {
                    log::debug!("closing idle connection");
                    return Ok(());
                }
            }
            Err(e) => return Err(e),
        }
    }
}
