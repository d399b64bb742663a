//! Message transports. Both carry encoded lines and deliver them in send
//! order.

use std::collections::VecDeque;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::mpsc::{self, Receiver};
use std::thread::{self, JoinHandle};

use super::wire::Message;

pub trait Transport {
    fn send(&mut self, msg: &Message) -> io::Result<()>;

    /// Every message sent and not yet received, oldest first.
    fn drain(&mut self) -> io::Result<Vec<Message>>;
}

fn decode_frame(line: &str) -> io::Result<Message> {
    Message::decode(line).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

/// In-process queue of frames.
#[derive(Debug, Default)]
pub struct Bus {
    frames: VecDeque<String>,
}

impl Bus {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Transport for Bus {
    fn send(&mut self, msg: &Message) -> io::Result<()> {
        self.frames.push_back(msg.encode());
        Ok(())
    }

    fn drain(&mut self) -> io::Result<Vec<Message>> {
        self.frames.drain(..).map(|l| decode_frame(&l)).collect()
    }
}

/// Line-delimited frames over a loopback TCP connection. A reader thread
/// pulls lines off the socket so the writer never blocks on a full buffer.
pub struct LoopbackSocket {
    writer: TcpStream,
    lines: Receiver<io::Result<String>>,
    in_flight: usize,
    reader: Option<JoinHandle<()>>,
}

impl LoopbackSocket {
    pub fn open() -> io::Result<Self> {
        let listener = TcpListener::bind(("127.0.0.1", 0))?;
        let writer = TcpStream::connect(listener.local_addr()?)?;
        writer.set_nodelay(true)?;
        let (stream, _) = listener.accept()?;
        let (tx, lines) = mpsc::channel();
        let reader = thread::spawn(move || {
            for line in BufReader::new(stream).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        Ok(LoopbackSocket { writer, lines, in_flight: 0, reader: Some(reader) })
    }
}

impl Transport for LoopbackSocket {
    fn send(&mut self, msg: &Message) -> io::Result<()> {
        let mut frame = msg.encode();
        frame.push('\n');
        self.writer.write_all(frame.as_bytes())?;
        self.in_flight += 1;
        Ok(())
    }

    fn drain(&mut self) -> io::Result<Vec<Message>> {
        self.writer.flush()?;
        let mut out = Vec::with_capacity(self.in_flight);
        while self.in_flight > 0 {
            let line = self
                .lines
                .recv()
                .map_err(|_| io::Error::new(io::ErrorKind::UnexpectedEof, "socket reader stopped"))??;
            self.in_flight -= 1;
            out.push(decode_frame(&line)?);
        }
        Ok(out)
    }
}

impl Drop for LoopbackSocket {
    fn drop(&mut self) {
        let _ = self.writer.shutdown(std::net::Shutdown::Both);
        if let Some(h) = self.reader.take() {
            let _ = h.join();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize) -> Vec<Message> {
        (0..n)
            .map(|i| match i % 3 {
                0 => Message::decode(&format!("OK a:{i}")).unwrap(),
                1 => Message::decode(&format!("MOVE b:{i} b c ⊥ {}.0 choose:1", i % 7)).unwrap(),
                _ => Message::decode(&format!("QUERY c:{i} c d x{i} # y")).unwrap(),
            })
            .collect()
    }

    fn pump(t: &mut dyn Transport, msgs: &[Message]) -> Vec<Message> {
        let mut got = Vec::new();
        for chunk in msgs.chunks(50) {
            for m in chunk {
                t.send(m).unwrap();
            }
            got.extend(t.drain().unwrap());
        }
        got
    }

    #[test]
    fn bus_preserves_order() {
        let msgs = sample(200);
        assert_eq!(pump(&mut Bus::new(), &msgs), msgs);
    }

    #[test]
    fn socket_preserves_order() {
        let msgs = sample(200);
        let mut s = LoopbackSocket::open().unwrap();
        assert_eq!(pump(&mut s, &msgs), msgs);
        assert!(s.drain().unwrap().is_empty());
    }
}
