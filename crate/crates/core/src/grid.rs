//! Square torus of ±1 spins.

use crate::{Error, Result};

/// Coordinate limit imposed by the keyed-draw packing (20 bits per axis).
pub const MAX_SIDE: u32 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Spin {
    Plus,
    Minus,
}

impl Spin {
    #[inline(always)]
    pub fn flipped(self) -> Spin {
        match self {
            Spin::Plus => Spin::Minus,
            Spin::Minus => Spin::Plus,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Spin::Plus => '+',
            Spin::Minus => '-',
        }
    }

    pub fn from_char(c: char) -> Result<Spin> {
        match c {
            '+' => Ok(Spin::Plus),
            '-' => Ok(Spin::Minus),
            other => Err(Error::InvalidParameter(format!(
                "spin character must be '+' or '-', got {other:?}"
            ))),
        }
    }
}

/// Periodic `side x side` grid, row-major with `y` as the row index.
#[derive(Clone, PartialEq, Eq)]
pub struct SpinGrid {
    side: u32,
    cells: Vec<Spin>,
}

impl SpinGrid {
    pub fn filled(side: u32, spin: Spin) -> Result<SpinGrid> {
        check_side(side)?;
        Ok(SpinGrid {
            side,
            cells: vec![spin; (side as usize) * (side as usize)],
        })
    }

    pub fn from_fn(side: u32, mut f: impl FnMut(u32, u32) -> Spin) -> Result<SpinGrid> {
        check_side(side)?;
        let mut cells = Vec::with_capacity((side as usize) * (side as usize));
        for y in 0..side {
            for x in 0..side {
                cells.push(f(x, y));
            }
        }
        Ok(SpinGrid { side, cells })
    }

    pub fn side(&self) -> u32 {
        self.side
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    #[inline(always)]
    pub fn get(&self, x: u32, y: u32) -> Spin {
        debug_assert!(x < self.side && y < self.side);
        self.cells[(y as usize) * (self.side as usize) + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, spin: Spin) {
        assert!(x < self.side && y < self.side);
        self.cells[(y as usize) * (self.side as usize) + x as usize] = spin;
    }

    pub(crate) fn from_cells(side: u32, cells: Vec<Spin>) -> SpinGrid {
        debug_assert_eq!(cells.len(), (side as usize) * (side as usize));
        SpinGrid { side, cells }
    }

    /// Fraction of `+` cells.
    pub fn density(&self) -> f64 {
        let plus = self.cells.iter().filter(|&&s| s == Spin::Plus).count();
        plus as f64 / self.cells.len() as f64
    }

    pub fn minus_fraction(&self) -> f64 {
        1.0 - self.density()
    }

    pub fn flipped(&self) -> SpinGrid {
        SpinGrid {
            side: self.side,
            cells: self.cells.iter().map(|s| s.flipped()).collect(),
        }
    }

    /// Text snapshot: a `R=<side>` header, then `side` rows of `+`/`-`.
    pub fn render(&self) -> String {
        let side = self.side as usize;
        let mut out = String::with_capacity(8 + side * (side + 1));
        out.push_str(&format!("R={}\n", self.side));
        for y in 0..self.side {
            for x in 0..self.side {
                out.push(self.get(x, y).to_char());
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<SpinGrid> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidParameter("empty snapshot".into()))?;
        let side: u32 = header
            .strip_prefix("R=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| {
                Error::InvalidParameter(format!("snapshot header must be R=<side>, got {header:?}"))
            })?;
        check_side(side)?;
        let mut cells = Vec::with_capacity((side as usize) * (side as usize));
        for y in 0..side {
            let row = lines.next().ok_or_else(|| {
                Error::InvalidParameter(format!("snapshot ends after {y} of {side} rows"))
            })?;
            if row.chars().count() != side as usize {
                return Err(Error::InvalidParameter(format!(
                    "snapshot row {y} has {} cells, expected {side}",
                    row.chars().count()
                )));
            }
            for c in row.chars() {
                cells.push(Spin::from_char(c)?);
            }
        }
        if lines.next().is_some_and(|l| !l.is_empty()) {
            return Err(Error::InvalidParameter(format!(
                "snapshot has trailing content after {side} rows"
            )));
        }
        Ok(SpinGrid { side, cells })
    }
}

fn check_side(side: u32) -> Result<()> {
    if side == 0 || side > MAX_SIDE {
        return Err(Error::InvalidParameter(format!(
            "grid side must be in 1..={MAX_SIDE}, got {side}"
        )));
    }
    Ok(())
}
