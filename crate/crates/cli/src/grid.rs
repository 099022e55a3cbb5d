//! `start:stop:geometric[:ratio]` and `start:stop:linear[:step]` grids.

use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub kind: GridKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridKind {
    Geometric(f64),
    Linear(f64),
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(format!(
                "expected start:stop:geometric|linear[:factor], got {s:?}"
            ));
        }
        let num = |p: &str| p.parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
        let (start, stop) = (num(parts[0])?, num(parts[1])?);
        if !(start > 0.0 && stop >= start && stop.is_finite()) {
            return Err(format!("need 0 < start ≤ stop, got {start}:{stop}"));
        }
        let factor = parts.get(3).map(|p| num(p)).transpose()?;
        let kind = match parts[2] {
            "geometric" => GridKind::Geometric(factor.unwrap_or(2.0)),
            "linear" => GridKind::Linear(factor.unwrap_or(1.0)),
            other => return Err(format!("unknown grid kind {other:?}")),
        };
        match kind {
            GridKind::Geometric(r) if !(r > 1.0) => Err(format!("ratio must exceed 1, got {r}")),
            GridKind::Linear(h) if !(h > 0.0) => Err(format!("step must be positive, got {h}")),
            _ => Ok(Grid { start, stop, kind }),
        }
    }
}

impl Grid {
    /// Points from `start` up to `stop`, with a small tolerance so that a
    /// nominal endpoint is not lost to rounding.
    pub fn points(&self) -> Vec<f64> {
        let limit = self.stop * (1.0 + 1e-12);
        let mut out = Vec::new();
        let mut k = 0i32;
        loop {
            let x = match self.kind {
                GridKind::Geometric(r) => self.start * r.powi(k),
                GridKind::Linear(h) => self.start + h * k as f64,
            };
            if x > limit {
                return out;
            }
            out.push(x);
            k += 1;
        }
    }

    /// Integer points, rounded half to even and deduplicated.
    pub fn integer_points(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .points()
            .iter()
            .map(|x| x.round_ties_even() as usize)
            .collect();
        out.dedup();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_expands() {
        let g: Grid = "8:512:geometric".parse().unwrap();
        assert_eq!(g.points(), vec![8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0]);
        let g: Grid = "4:7:linear".parse().unwrap();
        assert_eq!(g.integer_points(), vec![4, 5, 6, 7]);
        let g: Grid = "16:256:geometric:1.2599210498948732".parse().unwrap();
        assert_eq!(g.integer_points().len(), 13);
    }

    #[test]
    fn rejects_malformed() {
        for s in [
            "8:512",
            "8:4:linear",
            "0:4:linear",
            "1:4:spiral",
            "1:4:geometric:1",
            "a:4:linear",
        ] {
            assert!(s.parse::<Grid>().is_err(), "{s}");
        }
    }
}
