//! Weighted finite deterministic transition systems.

use crate::error::{Error, Result};
use crate::ltl::{AtomSet, Label};

/// Weighted DTS with planar coordinates and the agent's label knowledge.
///
/// Successor lists are kept sorted by target so that every traversal is
/// deterministic.
#[derive(Clone, Debug)]
pub struct Dts {
    atoms: AtomSet,
    coords: Vec<(f64, f64)>,
    initial: usize,
    succ: Vec<Vec<(usize, f64)>>,
    pred: Vec<Vec<usize>>,
    labels: Vec<Label>,
    grid: Option<(usize, usize)>,
}

impl Dts {
    pub fn new(atoms: AtomSet, coords: Vec<(f64, f64)>, initial: usize) -> Result<Dts> {
        let n = coords.len();
        if initial >= n {
            return Err(Error::CellOutOfRange {
                x: initial as i64,
                y: 0,
                width: n,
                height: 1,
            });
        }
        Ok(Dts {
            atoms,
            coords,
            initial,
            succ: vec![Vec::new(); n],
            pred: vec![Vec::new(); n],
            labels: vec![Label::EMPTY; n],
            grid: None,
        })
    }

    /// Adds `q -> r` weighted by the Euclidean distance of the centers, 1.0 for a self-loop.
    pub fn add_transition(&mut self, q: usize, r: usize) {
        let w = if q == r {
            1.0
        } else {
            let (a, b) = (self.coords[q], self.coords[r]);
            ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
        };
        self.add_weighted_transition(q, r, w);
    }

    /// Panics unless `w` is strictly positive and finite.
    pub fn add_weighted_transition(&mut self, q: usize, r: usize, w: f64) {
        assert!(w > 0.0 && w.is_finite(), "transition weight must be positive");
        let row = &mut self.succ[q];
        match row.binary_search_by_key(&r, |e| e.0) {
            Ok(i) => row[i].1 = w,
            Err(i) => {
                row.insert(i, (r, w));
                let p = &mut self.pred[r];
                let j = p.binary_search(&q).unwrap_err();
                p.insert(j, q);
            }
        }
    }

    pub fn atoms(&self) -> &AtomSet {
        &self.atoms
    }

    pub fn num_states(&self) -> usize {
        self.coords.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn coords(&self, q: usize) -> (f64, f64) {
        self.coords[q]
    }

    pub fn succ(&self, q: usize) -> &[(usize, f64)] {
        &self.succ[q]
    }

    pub fn pred(&self, q: usize) -> &[usize] {
        &self.pred[q]
    }

    pub fn label(&self, q: usize) -> Label {
        self.labels[q]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn set_label(&mut self, q: usize, l: Label) {
        self.labels[q] = l;
    }

    /// `(width, height)` when built by [`build_grid_dts`].
    pub fn grid(&self) -> Option<(usize, usize)> {
        self.grid
    }

    /// Chebyshev distance between state centers.
    pub fn chebyshev(&self, q: usize, r: usize) -> f64 {
        let (a, b) = (self.coords[q], self.coords[r]);
        (a.0 - b.0).abs().max((a.1 - b.1).abs())
    }

    /// States within Chebyshev distance `radius` of `q`, ascending.
    pub fn ball(&self, q: usize, radius: usize) -> Vec<usize> {
        if let Some((w, h)) = self.grid {
            let (x, y) = (q % w, q / w);
            let mut out = Vec::new();
            for yy in y.saturating_sub(radius)..=(y + radius).min(h - 1) {
                for xx in x.saturating_sub(radius)..=(x + radius).min(w - 1) {
                    out.push(yy * w + xx);
                }
            }
            return out;
        }
        (0..self.num_states())
            .filter(|&r| self.chebyshev(q, r) <= radius as f64 + 1e-9)
            .collect()
    }
}

/// Cell index of `(x, y)` on a `width`-wide grid, row-major.
pub fn cell_index(x: usize, y: usize, width: usize) -> usize {
    y * width + x
}

/// Builds a 4-connected grid with self-loops on unit cells.
pub fn build_grid_dts(
    width: usize,
    height: usize,
    initial: (usize, usize),
    atoms: AtomSet,
    labels: impl Fn(usize, usize) -> Label,
) -> Result<Dts> {
    if width == 0 || height == 0 || initial.0 >= width || initial.1 >= height {
        return Err(Error::CellOutOfRange {
            x: initial.0 as i64,
            y: initial.1 as i64,
            width,
            height,
        });
    }
    let coords = (0..width * height)
        .map(|i| ((i % width) as f64, (i / width) as f64))
        .collect();
    let mut d = Dts::new(atoms, coords, cell_index(initial.0, initial.1, width))?;
    d.grid = Some((width, height));
    for y in 0..height {
        for x in 0..width {
            let q = cell_index(x, y, width);
            d.labels[q] = labels(x, y);
            d.add_transition(q, q);
            if x + 1 < width {
                d.add_transition(q, q + 1);
                d.add_transition(q + 1, q);
            }
            if y + 1 < height {
                d.add_transition(q, q + width);
                d.add_transition(q + width, q);
            }
        }
    }
    Ok(d)
}

/// Weight of `q -> r`, or an error if it is not a transition.
pub fn transition_weight(d: &Dts, q: usize, r: usize) -> Result<f64> {
    d.succ(q)
        .binary_search_by_key(&r, |e| e.0)
        .map(|i| d.succ(q)[i].1)
        .map_err(|_| Error::NotATransition(q, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atoms() -> AtomSet {
        AtomSet::new(["a"]).unwrap()
    }

    #[test]
    fn grid_sizes() {
        let d = build_grid_dts(10, 10, (0, 0), atoms(), |_, _| Label::EMPTY).unwrap();
        assert_eq!(d.num_states(), 100);
        let d = build_grid_dts(30, 30, (0, 0), atoms(), |_, _| Label::EMPTY).unwrap();
        assert_eq!(d.num_states(), 900);
        // 4-neighbour moves both ways plus one self-loop per cell.
        assert_eq!(d.num_transitions(), 900 + 4 * 30 * 29);
    }

    #[test]
    fn single_cell_has_only_self_loop() {
        let d = build_grid_dts(1, 1, (0, 0), atoms(), |_, _| Label::EMPTY).unwrap();
        assert_eq!(d.succ(0), &[(0, 1.0)]);
    }

    #[test]
    fn weights() {
        let d = build_grid_dts(3, 3, (1, 1), atoms(), |_, _| Label::EMPTY).unwrap();
        assert_eq!(transition_weight(&d, 3, 4).unwrap(), 1.0);
        assert_eq!(transition_weight(&d, 4, 4).unwrap(), 1.0);
        assert!(matches!(transition_weight(&d, 0, 8), Err(Error::NotATransition(0, 8))));
    }

    #[test]
    fn initial_out_of_range() {
        assert!(build_grid_dts(3, 3, (3, 0), atoms(), |_, _| Label::EMPTY).is_err());
    }

    #[test]
    fn ball_is_clipped_window() {
        let d = build_grid_dts(10, 10, (0, 0), atoms(), |_, _| Label::EMPTY).unwrap();
        assert_eq!(d.ball(0, 0), vec![0]);
        assert_eq!(d.ball(cell_index(5, 5, 10), 4).len(), 81);
        assert_eq!(d.ball(0, 4).len(), 25);
        assert_eq!(d.ball(0, 9).len(), 100);
        let generic: Vec<usize> = (0..100).filter(|&r| d.chebyshev(55, r) <= 4.0).collect();
        assert_eq!(d.ball(55, 4), generic);
    }
}
