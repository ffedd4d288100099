//! Scripted rigid-body motion driving the indenter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::Pose;

/// One scripted keyframe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScriptFrame {
    /// Time (s), strictly increasing across the script.
    pub t: f64,
    pub pose: Pose,
}

/// Sequence of rigid poses with timestamps. The solver interpolates between
/// consecutive frames (lerp position, slerp orientation) and substeps so the
/// boundary never moves more than half the barrier activation distance per
/// solve.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RigidScript {
    pub frames: Vec<ScriptFrame>,
}

impl RigidScript {
    pub fn new(frames: Vec<ScriptFrame>) -> Result<Self> {
        let script = RigidScript { frames };
        script.validate()?;
        Ok(script)
    }

    pub fn validate(&self) -> Result<()> {
        let mut prev_t = f64::NEG_INFINITY;
        for (i, frame) in self.frames.iter().enumerate() {
            if !frame.t.is_finite() || frame.t <= prev_t {
                return Err(Error::DiscontinuousScript {
                    frame: i,
                    reason: format!("timestamp {} not strictly increasing", frame.t),
                });
            }
            if !frame.pose.position.iter().all(|c| c.is_finite()) {
                return Err(Error::DiscontinuousScript {
                    frame: i,
                    reason: "non-finite position".into(),
                });
            }
            let qn = frame.pose.orientation.as_ref().norm();
            if (qn - 1.0).abs() > 1e-9 {
                return Err(Error::DiscontinuousScript {
                    frame: i,
                    reason: format!("orientation quaternion norm {qn} is not 1"),
                });
            }
            prev_t = frame.t;
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }
}
