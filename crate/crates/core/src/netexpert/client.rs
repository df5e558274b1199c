//! Blocking client for the expertise server. One connection carries any
//! number of request/response pairs.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use super::protocol::Message;
use super::{ExpertAnswer, ExpertiseProfile};
use crate::error::{Error, Result};

pub struct ExpertClient {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl ExpertClient {
    pub fn connect<A: ToSocketAddrs>(addr: A, timeout: Duration) -> Result<Self> {
        let io = |e| Error::io("connecting to expertise server", e);
        let target = addr
            .to_socket_addrs()
            .map_err(io)?
            .next()
            .ok_or_else(|| Error::Protocol("server address resolved to nothing".into()))?;
        let stream = TcpStream::connect_timeout(&target, timeout).map_err(io)?;
        stream.set_read_timeout(Some(timeout)).map_err(io)?;
        stream.set_write_timeout(Some(timeout)).map_err(io)?;
        let writer = stream.try_clone().map_err(io)?;
        Ok(ExpertClient { reader: BufReader::new(stream), writer })
    }

    pub fn request(&mut self, message: &Message) -> Result<Message> {
        let io = |e| Error::io("talking to expertise server", e);
        self.writer.write_all(message.to_line().as_bytes()).map_err(io)?;
        self.writer.flush().map_err(io)?;
        let mut line = String::new();
        if self.reader.read_line(&mut line).map_err(io)? == 0 {
            return Err(Error::Protocol("server closed the connection".into()));
        }
        Message::from_line(&line)
    }

    pub fn publish(&mut self, profile: &ExpertiseProfile) -> Result<()> {
        let msg = Message::Publish { user: profile.user.clone(), terms: profile.terms.clone() };
        match self.request(&msg)? {
            Message::Ack => Ok(()),
            Message::Error { msg } => Err(Error::Protocol(msg)),
            other => Err(Error::Protocol(format!("unexpected reply {other:?}"))),
        }
    }

    pub fn experts(&mut self, terms: &[String]) -> Result<ExpertAnswer> {
        match self.request(&Message::Experts { terms: terms.to_vec() })? {
            Message::Answer { per_term } => Ok(ExpertAnswer { per_term }),
            Message::Error { msg } => Err(Error::Protocol(msg)),
            other => Err(Error::Protocol(format!("unexpected reply {other:?}"))),
        }
    }
}
