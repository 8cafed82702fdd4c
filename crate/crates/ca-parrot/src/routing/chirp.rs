//! Wire format for the periodic announcement frame.
//!
//! A chirp is exactly [`CHIRP_WIRE_BYTES`] on the air: two `u32` header
//! words followed by eight `f32` payload words, all little-endian. The
//! struct stores the payload as `f32` so that encode/decode round-trips
//! are bit-exact.

use crate::mobility::Vec3;

/// Encoded size of every chirp, in bytes.
pub const CHIRP_WIRE_BYTES: usize = 40;

/// Node identifier. `Ord` is used for deterministic tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Decode failure for an incoming frame.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChirpCodecError {
    /// Payload length differs from the fixed wire size.
    #[error("chirp payload is {0} bytes, expected {CHIRP_WIRE_BYTES}")]
    WrongLength(usize),
}

/// One routing announcement.
///
/// `position` and `velocity` describe the emitting hop (originator or
/// forwarder), not the originator: a forwarder substitutes its own
/// kinematics so that the receiver can score the link it actually heard
/// the frame on. `value` is the emitter's route-quality estimate toward
/// `originator` (1.0 when the originator itself speaks) and `cohesion`
/// is the emitter's neighborhood-stability score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chirp {
    pub originator: NodeId,
    pub seq: u32,
    pub position: [f32; 3],
    pub velocity: [f32; 3],
    pub value: f32,
    pub cohesion: f32,
}

impl Chirp {
    /// Serializes to the fixed little-endian layout.
    pub fn encode(&self) -> [u8; CHIRP_WIRE_BYTES] {
        let mut out = [0u8; CHIRP_WIRE_BYTES];
        out[0..4].copy_from_slice(&self.originator.0.to_le_bytes());
        out[4..8].copy_from_slice(&self.seq.to_le_bytes());
        let words = [
            self.position[0],
            self.position[1],
            self.position[2],
            self.velocity[0],
            self.velocity[1],
            self.velocity[2],
            self.value,
            self.cohesion,
        ];
        for (i, w) in words.iter().enumerate() {
            let off = 8 + 4 * i;
            out[off..off + 4].copy_from_slice(&w.to_le_bytes());
        }
        out
    }

    /// Parses a frame; the only failure mode is a wrong payload length.
    pub fn decode(bytes: &[u8]) -> Result<Self, ChirpCodecError> {
        if bytes.len() != CHIRP_WIRE_BYTES {
            return Err(ChirpCodecError::WrongLength(bytes.len()));
        }
        let u32_at = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
        let f32_at = |off: usize| f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
        Ok(Chirp {
            originator: NodeId(u32_at(0)),
            seq: u32_at(4),
            position: [f32_at(8), f32_at(12), f32_at(16)],
            velocity: [f32_at(20), f32_at(24), f32_at(28)],
            value: f32_at(32),
            cohesion: f32_at(36),
        })
    }

    pub fn position_vec(&self) -> Vec3 {
        Vec3::new(
            self.position[0] as f64,
            self.position[1] as f64,
            self.position[2] as f64,
        )
    }

    pub fn velocity_vec(&self) -> Vec3 {
        Vec3::new(
            self.velocity[0] as f64,
            self.velocity[1] as f64,
            self.velocity[2] as f64,
        )
    }
}

/// Narrows a `Vec3` to the `f32` triple carried on the wire.
pub fn vec_to_wire(v: Vec3) -> [f32; 3] {
    [v.x as f32, v.y as f32, v.z as f32]
}
