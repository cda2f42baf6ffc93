//! Piecewise Chebyshev interpolation with adaptive bisection.

use crate::error::Result;

const NODES: usize = 17;

#[derive(Debug, Clone)]
struct Piece {
    a: f64,
    b: f64,
    values: [f64; NODES],
}

fn node(j: usize) -> f64 {
    (std::f64::consts::PI * j as f64 / (NODES - 1) as f64).cos()
}

impl Piece {
    fn eval(&self, x: f64) -> f64 {
        let s = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..NODES {
            let d = s - node(j);
            if d == 0.0 {
                return self.values[j];
            }
            let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == NODES - 1 {
                w *= 0.5;
            }
            num += w * self.values[j] / d;
            den += w / d;
        }
        num / den
    }
}

#[derive(Debug, Clone)]
pub struct PiecewiseChebyshev {
    pieces: Vec<Piece>,
}

impl PiecewiseChebyshev {
    /// Bisects `[a, b]` until every piece reproduces `f` at off-node test
    /// points within `abs_tol`, or the piece is narrower than `min_width`.
    pub fn build<F: Fn(f64) -> Result<f64>>(
        f: F,
        a: f64,
        b: f64,
        abs_tol: f64,
        min_width: f64,
    ) -> Result<Self> {
        let mut pieces = Vec::new();
        let mut stack = vec![(a, b)];
        while let Some((lo, hi)) = stack.pop() {
            let mut values = [0.0; NODES];
            for (j, v) in values.iter_mut().enumerate() {
                *v = f(0.5 * (lo + hi) + 0.5 * (hi - lo) * node(j))?;
            }
            let piece = Piece { a: lo, b: hi, values };
            let mut worst: f64 = 0.0;
            for j in [0, NODES / 3, NODES / 2, NODES - 2] {
                let s = 0.5 * (node(j) + node(j + 1));
                let x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * s;
                worst = worst.max((piece.eval(x) - f(x)?).abs());
            }
            if worst <= abs_tol || hi - lo <= min_width {
                pieces.push(piece);
            } else {
                let mid = 0.5 * (lo + hi);
                // push the right half first so pieces come out left to right
                stack.push((mid, hi));
                stack.push((lo, mid));
            }
        }
        Ok(Self { pieces })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.pieces[0].a, self.pieces[self.pieces.len() - 1].b)
    }

    pub fn contains(&self, x: f64) -> bool {
        let (a, b) = self.domain();
        x >= a && x <= b
    }

    #[cfg(test)]
    pub fn pieces(&self) -> usize {
        self.pieces.len()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let idx = self
            .pieces
            .partition_point(|p| p.b < x)
            .min(self.pieces.len() - 1);
        self.pieces[idx].eval(x)
    }
}
