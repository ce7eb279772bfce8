//! Blocking client for the line-delimited JSON protocol.

use std::io::{self, BufRead, BufReader, ErrorKind, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::{Duration, Instant};

use thiserror::Error;

use super::{Request, Response};

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("connection: {0}")]
    Io(#[from] io::Error),
    #[error("timed out waiting for a response")]
    Timeout,
    #[error("server closed the connection")]
    Closed,
    #[error("undecodable response: {0}")]
    Protocol(String),
    #[error("response for request {got:?} while waiting for {expected:?}")]
    Mismatch { expected: Option<i64>, got: Option<i64> },
}

/// One persistent connection. Requests may be pipelined with
/// [`Client::send`] and [`Client::recv`].
pub struct Client {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
    pending: Vec<u8>,
}

impl Client {
    pub fn connect<A: ToSocketAddrs>(addr: A) -> Result<Self, ClientError> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        let writer = stream.try_clone()?;
        Ok(Client { reader: BufReader::new(stream), writer, pending: Vec::new() })
    }

    pub fn send(&mut self, req: &Request) -> Result<(), ClientError> {
        let mut line = serde_json::to_vec(req).map_err(|e| ClientError::Protocol(e.to_string()))?;
        line.push(b'\n');
        self.writer.write_all(&line)?;
        Ok(())
    }

    /// Send raw bytes as-is, for protocol testing.
    pub fn send_raw(&mut self, bytes: &[u8]) -> Result<(), ClientError> {
        self.writer.write_all(bytes)?;
        Ok(())
    }

    /// Next response frame, waiting at most `timeout`.
    pub fn recv(&mut self, timeout: Duration) -> Result<Response, ClientError> {
        let deadline = Instant::now() + timeout;
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            if left.is_zero() {
                return Err(ClientError::Timeout);
            }
            self.reader.get_ref().set_read_timeout(Some(left))?;
            match self.reader.read_until(b'\n', &mut self.pending) {
                Ok(0) => return Err(ClientError::Closed),
                Ok(_) if self.pending.last() == Some(&b'\n') => {
                    let line = std::mem::take(&mut self.pending);
                    return serde_json::from_slice(&line).map_err(|e| ClientError::Protocol(e.to_string()));
                }
                Ok(_) => return Err(ClientError::Closed),
                Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {
                    return Err(ClientError::Timeout);
                }
                Err(e) if e.kind() == ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
    }

    /// Send one request and wait for its response.
    pub fn request(&mut self, req: &Request, timeout: Duration) -> Result<Response, ClientError> {
        self.send(req)?;
        let resp = self.recv(timeout)?;
        if resp.request_id != req.request_id {
            return Err(ClientError::Mismatch { expected: req.request_id, got: resp.request_id });
        }
        Ok(resp)
    }
}
