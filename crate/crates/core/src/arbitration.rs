//! Primary-hand selection.
//!
//! Three strategies pick which hand drives the cursor: a fixed preference,
//! nearness to the sensor with a hysteresis gap, or motion activity. Activity
//! is an exponentially decayed accumulator of image-plane displacement,
//! `A <- A / 2 + |d_pos|`, updated once per frame for every tracked hand.

use thiserror::Error;

use crate::model::{Hand, HandPreference, Hands, SkeletonFrame};

/// Neither hand is tracked in the current frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("no hand tracked")]
pub struct NoHand;

#[derive(Debug, Clone, PartialEq)]
pub struct ArbitrationState {
    pub current: Hand,
    pub activity_left: f64,
    pub activity_right: f64,
    pub last_left: Option<(f64, f64)>,
    pub last_right: Option<(f64, f64)>,
    pub nearness_delta: f64,
}

impl Default for ArbitrationState {
    fn default() -> Self {
        ArbitrationState::new(Hand::Left, 0.10)
    }
}

impl ArbitrationState {
    pub fn new(initial: Hand, nearness_delta: f64) -> Self {
        ArbitrationState {
            current: initial,
            activity_left: 0.0,
            activity_right: 0.0,
            last_left: None,
            last_right: None,
            nearness_delta,
        }
    }

    pub fn activity(&self, hand: Hand) -> f64 {
        match hand {
            Hand::Left => self.activity_left,
            Hand::Right => self.activity_right,
        }
    }

    /// Decays and accumulates activity for each tracked hand. A hand seen for
    /// the first time contributes zero displacement.
    pub fn update_activity(&mut self, hands: &Hands) {
        fn step(activity: &mut f64, last: &mut Option<(f64, f64)>, x: f64, y: f64) {
            let moved = last.map_or(0.0, |(lx, ly)| (x - lx).hypot(y - ly));
            *activity = *activity / 2.0 + moved;
            *last = Some((x, y));
        }
        if let Some(p) = hands.left {
            step(&mut self.activity_left, &mut self.last_left, p.x, p.y);
        }
        if let Some(p) = hands.right {
            step(&mut self.activity_right, &mut self.last_right, p.x, p.y);
        }
    }

    /// Switches away from the current hand only when the other one is nearer
    /// by more than `nearness_delta`.
    pub fn select_by_nearness(&self, hands: &Hands) -> Result<Hand, NoHand> {
        let current = self.current;
        match (hands.get(current), hands.get(current.other())) {
            (Some(cur), Some(other)) => {
                if cur.z - other.z > self.nearness_delta {
                    Ok(current.other())
                } else {
                    Ok(current)
                }
            }
            (Some(_), None) => Ok(current),
            (None, Some(_)) => Ok(current.other()),
            (None, None) => Err(NoHand),
        }
    }

    /// Picks the strictly more active tracked hand; ties keep the current one.
    pub fn select_by_activity(&self, hands: &Hands) -> Result<Hand, NoHand> {
        let current = self.current;
        match (hands.get(current), hands.get(current.other())) {
            (Some(_), Some(_)) => {
                if self.activity(current.other()) > self.activity(current) {
                    Ok(current.other())
                } else {
                    Ok(current)
                }
            }
            (Some(_), None) => Ok(current),
            (None, Some(_)) => Ok(current.other()),
            (None, None) => Err(NoHand),
        }
    }

    /// Runs one frame of arbitration. Activity is always updated first so
    /// its history is warm if the preference changes mid-session.
    ///
    /// A fixed preference whose hand is untracked yields [`NoHand`]: the
    /// cursor freezes rather than jumping to the other hand.
    pub fn arbitrate(&mut self, frame: &SkeletonFrame, preference: HandPreference) -> Result<Hand, NoHand> {
        let hands = frame.hands();
        self.arbitrate_hands(&hands, preference)
    }

    pub fn arbitrate_hands(&mut self, hands: &Hands, preference: HandPreference) -> Result<Hand, NoHand> {
        self.update_activity(hands);
        let chosen = match preference {
            HandPreference::Left => hands.left.map(|_| Hand::Left).ok_or(NoHand),
            HandPreference::Right => hands.right.map(|_| Hand::Right).ok_or(NoHand),
            HandPreference::AutoNearness => self.select_by_nearness(hands),
            HandPreference::AutoActivity => self.select_by_activity(hands),
        }?;
        self.current = chosen;
        Ok(chosen)
    }
}
