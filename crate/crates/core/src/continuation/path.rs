//! Piecewise paths in the complex plane, parametrized by arc length.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use crate::algebra2::C64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Piece {
    Segment { from: C64, to: C64 },
    /// Circular arc from angle `start` through `sweep` radians.
    Arc {
        center: C64,
        radius: f64,
        start: f64,
        sweep: f64,
    },
}

impl Piece {
    pub fn length(&self) -> f64 {
        match *self {
            Piece::Segment { from, to } => (to - from).norm(),
            Piece::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    /// Point at arc length `s` from the start.
    pub fn point(&self, s: f64) -> C64 {
        match *self {
            Piece::Segment { from, to } => {
                let len = self.length();
                if len == 0.0 {
                    from
                } else {
                    from + (to - from) * (s / len)
                }
            }
            Piece::Arc {
                center,
                radius,
                start,
                sweep,
            } => center + C64::from_polar(radius, start + sweep.signum() * s / radius),
        }
    }

    /// Unit tangent `dz/ds` at arc length `s`.
    pub fn tangent(&self, s: f64) -> C64 {
        match *self {
            Piece::Segment { from, to } => {
                let d = to - from;
                let n = d.norm();
                if n == 0.0 {
                    C64::new(0.0, 0.0)
                } else {
                    d / n
                }
            }
            Piece::Arc {
                radius,
                start,
                sweep,
                ..
            } => {
                let sign = sweep.signum();
                C64::from_polar(1.0, start + sign * s / radius) * C64::new(0.0, sign)
            }
        }
    }

    pub fn start(&self) -> C64 {
        self.point(0.0)
    }

    pub fn end(&self) -> C64 {
        match *self {
            Piece::Segment { to, .. } => to,
            _ => self.point(self.length()),
        }
    }

    /// Change of `log(z − a)` along the piece, tracked continuously.
    pub fn log_increment(&self, a: C64) -> C64 {
        match *self {
            Piece::Segment { from, to } => ((to - a) / (from - a)).ln(),
            Piece::Arc { sweep, .. } => {
                let parts = (sweep.abs() / FRAC_PI_2).ceil().max(1.0) as usize;
                let len = self.length();
                (0..parts)
                    .map(|k| {
                        let z0 = self.point(len * k as f64 / parts as f64);
                        let z1 = self.point(len * (k + 1) as f64 / parts as f64);
                        ((z1 - a) / (z0 - a)).ln()
                    })
                    .sum()
            }
        }
    }

    /// Smallest distance from `a` to the piece.
    pub fn distance_to(&self, a: C64) -> f64 {
        match *self {
            Piece::Segment { from, to } => {
                let d = to - from;
                let n2 = d.norm_sqr();
                if n2 == 0.0 {
                    return (a - from).norm();
                }
                let t = (((a - from) * d.conj()).re / n2).clamp(0.0, 1.0);
                (from + d * t - a).norm()
            }
            Piece::Arc {
                center,
                radius,
                start,
                sweep,
            } => {
                let off = a - center;
                if sweep.abs() >= TAU {
                    return (off.norm() - radius).abs();
                }
                let mut best = (self.start() - a).norm().min((self.end() - a).norm());
                if off.norm() > 0.0 {
                    let rel = (sweep.signum() * (off.arg() - start)).rem_euclid(TAU);
                    if rel <= sweep.abs() {
                        best = best.min((off.norm() - radius).abs());
                    }
                }
                best
            }
        }
    }
}

/// A connected sequence of pieces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub pieces: Vec<Piece>,
}

impl Path {
    pub fn new(pieces: Vec<Piece>) -> Self {
        Path { pieces }
    }

    pub fn segment(from: C64, to: C64) -> Self {
        Path::new(vec![Piece::Segment { from, to }])
    }

    /// Segment from `base` to the circle of radius `radius` about `center`,
    /// one full turn, and back.
    pub fn lasso(base: C64, center: C64, radius: f64, counterclockwise: bool) -> Self {
        let dir = base - center;
        let angle = dir.arg();
        let entry = center + C64::from_polar(radius, angle);
        let sweep = if counterclockwise { TAU } else { -TAU };
        Path::new(vec![
            Piece::Segment { from: base, to: entry },
            Piece::Arc {
                center,
                radius,
                start: angle,
                sweep,
            },
            Piece::Segment { from: entry, to: base },
        ])
    }

    pub fn start(&self) -> C64 {
        self.pieces[0].start()
    }

    pub fn end(&self) -> C64 {
        self.pieces[self.pieces.len() - 1].end()
    }

    pub fn length(&self) -> f64 {
        self.pieces.iter().map(Piece::length).sum()
    }

    pub fn log_increment(&self, a: C64) -> C64 {
        self.pieces.iter().map(|p| p.log_increment(a)).sum()
    }

    pub fn distance_to(&self, a: C64) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.distance_to(a))
            .fold(f64::INFINITY, f64::min)
    }

    /// Winding number about `a`, for closed paths.
    pub fn winding_number(&self, a: C64) -> i64 {
        (self.log_increment(a).im / TAU).round() as i64
    }

    /// Points sampled along the path, `per_piece` intervals per piece.
    pub fn polyline(&self, per_piece: usize) -> Vec<C64> {
        let n = per_piece.max(1);
        let mut out = vec![self.start()];
        for p in &self.pieces {
            let len = p.length();
            out.extend((1..=n).map(|k| p.point(len * k as f64 / n as f64)));
        }
        out
    }
}
