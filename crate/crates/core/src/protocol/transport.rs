//! Message framing and the two transports. A frame is
//! [phase: 1 byte][length: 4 bytes big-endian][payload].

use super::ProtocolError;
use serde::{Deserialize, Serialize};
use std::io::{BufReader, BufWriter, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::mpsc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Phase {
    Setup,
    BaseApply,
    ResultEvalMask,
    GcTables,
    Ot,
    OutputLabels,
    Done,
}

impl Phase {
    pub const ALL: [Phase; 7] = [
        Phase::Setup,
        Phase::BaseApply,
        Phase::ResultEvalMask,
        Phase::GcTables,
        Phase::Ot,
        Phase::OutputLabels,
        Phase::Done,
    ];

    pub fn tag(self) -> u8 {
        self as u8
    }

    pub fn from_tag(t: u8) -> Option<Phase> {
        Self::ALL.get(t as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Phase::Setup => "SETUP",
            Phase::BaseApply => "BASE_APPLY",
            Phase::ResultEvalMask => "RESULT_EVAL_MASK",
            Phase::GcTables => "GC_TABLES",
            Phase::Ot => "OT",
            Phase::OutputLabels => "OUTPUT_LABELS",
            Phase::Done => "DONE",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub phase: Phase,
    pub payload: Vec<u8>,
}

impl Message {
    pub fn new(phase: Phase, payload: Vec<u8>) -> Self {
        Self { phase, payload }
    }

    pub fn frame(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(5 + self.payload.len());
        out.push(self.phase.tag());
        out.extend_from_slice(&(self.payload.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_frame(frame: &[u8]) -> Result<Self, ProtocolError> {
        if frame.len() < 5 {
            return Err(ProtocolError::Malformed("short frame".into()));
        }
        let phase = Phase::from_tag(frame[0])
            .ok_or_else(|| ProtocolError::Malformed(format!("unknown phase tag {}", frame[0])))?;
        let len = u32::from_be_bytes(frame[1..5].try_into().expect("4 bytes")) as usize;
        if frame.len() != 5 + len {
            return Err(ProtocolError::Malformed("frame length mismatch".into()));
        }
        Ok(Self {
            phase,
            payload: frame[5..].to_vec(),
        })
    }

    /// Size on the wire, header included.
    pub fn wire_len(&self) -> usize {
        5 + self.payload.len()
    }
}

pub trait Transport: Send {
    fn send(&mut self, msg: &Message) -> Result<(), ProtocolError>;
    fn recv(&mut self) -> Result<Message, ProtocolError>;

    /// Receives and checks the phase tag.
    fn expect(&mut self, phase: Phase) -> Result<Vec<u8>, ProtocolError> {
        let m = self.recv()?;
        if m.phase != phase {
            return Err(ProtocolError::UnexpectedPhase {
                expected: phase,
                found: m.phase,
            });
        }
        Ok(m.payload)
    }
}

impl<T: Transport + ?Sized> Transport for Box<T> {
    fn send(&mut self, msg: &Message) -> Result<(), ProtocolError> {
        (**self).send(msg)
    }
    fn recv(&mut self) -> Result<Message, ProtocolError> {
        (**self).recv()
    }
}

/// One end of an in-process duplex queue carrying encoded frames.
pub struct InProcessTransport {
    tx: mpsc::Sender<Vec<u8>>,
    rx: mpsc::Receiver<Vec<u8>>,
}

pub fn in_process_pair() -> (InProcessTransport, InProcessTransport) {
    let (a_tx, b_rx) = mpsc::channel();
    let (b_tx, a_rx) = mpsc::channel();
    (
        InProcessTransport { tx: a_tx, rx: a_rx },
        InProcessTransport { tx: b_tx, rx: b_rx },
    )
}

impl Transport for InProcessTransport {
    fn send(&mut self, msg: &Message) -> Result<(), ProtocolError> {
        self.tx
            .send(msg.frame())
            .map_err(|_| ProtocolError::TransportClosed)
    }

    fn recv(&mut self) -> Result<Message, ProtocolError> {
        let frame = self.rx.recv().map_err(|_| ProtocolError::TransportClosed)?;
        Message::from_frame(&frame)
    }
}

/// Frames over any byte stream (TCP in practice).
pub struct StreamTransport<S: Read + Write> {
    reader: BufReader<S>,
    writer: BufWriter<S>,
}

impl StreamTransport<TcpStream> {
    pub fn new(stream: TcpStream) -> std::io::Result<Self> {
        stream.set_nodelay(true)?;
        let r = stream.try_clone()?;
        Ok(Self {
            reader: BufReader::new(r),
            writer: BufWriter::new(stream),
        })
    }
}

fn io_err(e: std::io::Error) -> ProtocolError {
    match e.kind() {
        std::io::ErrorKind::UnexpectedEof
        | std::io::ErrorKind::BrokenPipe
        | std::io::ErrorKind::ConnectionReset
        | std::io::ErrorKind::ConnectionAborted => ProtocolError::TransportClosed,
        _ => ProtocolError::Io(e.to_string()),
    }
}

impl<S: Read + Write + Send> Transport for StreamTransport<S> {
    fn send(&mut self, msg: &Message) -> Result<(), ProtocolError> {
        self.writer.write_all(&msg.frame()).map_err(io_err)?;
        self.writer.flush().map_err(io_err)
    }

    fn recv(&mut self) -> Result<Message, ProtocolError> {
        let mut header = [0u8; 5];
        self.reader.read_exact(&mut header).map_err(io_err)?;
        let phase = Phase::from_tag(header[0])
            .ok_or_else(|| ProtocolError::Malformed(format!("unknown phase tag {}", header[0])))?;
        let len = u32::from_be_bytes(header[1..].try_into().expect("4 bytes")) as usize;
        let mut payload = vec![0u8; len];
        self.reader.read_exact(&mut payload).map_err(io_err)?;
        Ok(Message { phase, payload })
    }
}

/// Two connected TCP endpoints on the loopback interface.
pub fn tcp_pair() -> Result<(StreamTransport<TcpStream>, StreamTransport<TcpStream>), ProtocolError> {
    let listener = TcpListener::bind("127.0.0.1:0").map_err(io_err)?;
    let addr = listener.local_addr().map_err(io_err)?;
    let client = TcpStream::connect(addr).map_err(io_err)?;
    let (server, _) = listener.accept().map_err(io_err)?;
    Ok((
        StreamTransport::new(client).map_err(io_err)?,
        StreamTransport::new(server).map_err(io_err)?,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum TransportKind {
    #[default]
    InProcess,
    Tcp,
}

pub type BoxedPair = (Box<dyn Transport>, Box<dyn Transport>);

/// A connected pair of the requested kind, boxed.
pub fn connect(kind: TransportKind) -> Result<BoxedPair, ProtocolError> {
    Ok(match kind {
        TransportKind::InProcess => {
            let (a, b) = in_process_pair();
            (Box::new(a), Box::new(b))
        }
        TransportKind::Tcp => {
            let (a, b) = tcp_pair()?;
            (Box::new(a), Box::new(b))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_layout() {
        let m = Message::new(Phase::Ot, vec![1, 2, 3]);
        assert_eq!(m.frame(), vec![4, 0, 0, 0, 3, 1, 2, 3]);
        assert_eq!(Message::from_frame(&m.frame()).unwrap(), m);
        assert!(Message::from_frame(&[9, 0, 0, 0, 0]).is_err());
        assert!(Message::from_frame(&[1, 0, 0, 0, 2, 0]).is_err());
    }

    #[test]
    fn transports_deliver_in_order() {
        for kind in [TransportKind::InProcess, TransportKind::Tcp] {
            let (mut a, mut b) = connect(kind).unwrap();
            let msgs: Vec<_> = (0..5u8)
                .map(|i| Message::new(Phase::ALL[i as usize], vec![i; 1000 * i as usize]))
                .collect();
            for m in &msgs {
                a.send(m).unwrap();
            }
            for m in &msgs {
                assert_eq!(&b.recv().unwrap(), m);
            }
            drop(a);
            assert_eq!(b.recv(), Err(ProtocolError::TransportClosed));
        }
    }
}
