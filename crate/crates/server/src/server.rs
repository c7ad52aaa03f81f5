//! Multi-session server over plain TCP or WebSocket on one port.
//!
//! A connection whose first bytes are `GET ` is upgraded to a WebSocket and
//! each text message may carry one or more lines. Anything else is treated
//! as a raw line stream. Every connection gets its own session; they share
//! only the dispatcher.

use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::Arc;
use std::thread;

use anyhow::Context;
use carecall_core::dispatch::Dispatcher;
use carecall_core::session::Session;
use carecall_core::AppConfig;
use log::{debug, info, warn};
use tungstenite::Message;

use crate::protocol;

pub struct Server {
    listener: TcpListener,
    config: Arc<AppConfig>,
    dispatcher: Arc<Dispatcher>,
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs, config: AppConfig) -> anyhow::Result<Server> {
        config.session.validate().context("invalid session configuration")?;
        let labels: Vec<Arc<str>> = config.session.labels.iter().map(|l| Arc::from(l.as_str())).collect();
        let dispatcher = Dispatcher::spawn(config.dispatch.clone(), &labels).context("starting dispatcher")?;
        let listener = TcpListener::bind(addr).context("binding listen address")?;
        Ok(Server {
            listener,
            config: Arc::new(config),
            dispatcher: Arc::new(dispatcher),
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    pub fn dispatcher(&self) -> &Arc<Dispatcher> {
        &self.dispatcher
    }

    /// Accepts connections until the listener fails.
    pub fn run(self) -> io::Result<()> {
        info!("listening on {}", self.listener.local_addr()?);
        for stream in self.listener.incoming() {
            let stream = match stream {
                Ok(s) => s,
                Err(e) => {
                    warn!("accept failed: {e}");
                    continue;
                }
            };
            let config = Arc::clone(&self.config);
            let handle = self.dispatcher.handle();
            thread::spawn(move || {
                let peer = stream.peer_addr().ok();
                let session = match Session::new(config.session.clone(), Some(handle)) {
                    Ok(s) => s,
                    Err(e) => {
                        warn!("session setup failed: {e}");
                        return;
                    }
                };
                debug!("session opened for {peer:?}");
                if let Err(e) = serve_connection(stream, session) {
                    debug!("connection {peer:?} ended: {e}");
                }
                debug!("session closed for {peer:?}");
            });
        }
        Ok(())
    }
}

fn serve_connection(stream: TcpStream, session: Session) -> io::Result<()> {
    stream.set_nodelay(true)?;
    let mut head = [0u8; 4];
    let n = stream.peek(&mut head)?;
    if n == 4 && &head == b"GET " {
        serve_websocket(stream, session)
    } else {
        serve_lines(stream, session)
    }
}

fn serve_lines(stream: TcpStream, mut session: Session) -> io::Result<()> {
    let reader = BufReader::new(stream.try_clone()?);
    let mut writer = BufWriter::new(stream);
    for line in reader.lines() {
        for reply in protocol::respond(&mut session, &line?) {
            writer.write_all(reply.as_bytes())?;
            writer.write_all(b"\n")?;
        }
        writer.flush()?;
    }
    Ok(())
}

fn serve_websocket(stream: TcpStream, mut session: Session) -> io::Result<()> {
    let mut ws = tungstenite::accept(stream).map_err(|e| io::Error::other(e.to_string()))?;
    loop {
        let message = match ws.read() {
            Ok(m) => m,
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => return Ok(()),
            Err(e) => return Err(io::Error::other(e.to_string())),
        };
        let text = match &message {
            Message::Text(t) => t.as_str().to_owned(),
            Message::Binary(b) => String::from_utf8_lossy(b).into_owned(),
            Message::Close(_) => return Ok(()),
            _ => continue,
        };
        let mut replies = Vec::new();
        for line in text.lines() {
            replies.extend(protocol::respond(&mut session, line));
        }
        for reply in replies {
            ws.send(Message::text(reply)).map_err(|e| io::Error::other(e.to_string()))?;
        }
    }
}
