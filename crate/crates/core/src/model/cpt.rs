use crate::error::{Error, Result};

/// Row-stochasticity tolerance.
pub const ROW_TOLERANCE: f64 = 1e-9;

/// Conditional probability table `P(child | parents)`.
///
/// Rows are indexed by the parent configuration in mixed radix (first parent
/// most significant). Cells with `allowed == false` are structural zeros;
/// rows with `reachable == false` are parent configurations that cannot
/// occur and are skipped by validation.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    pub name: String,
    pub child: String,
    pub parents: Vec<String>,
    pub parent_cards: Vec<usize>,
    pub child_card: usize,
    table: Vec<f64>,
    allowed: Vec<bool>,
    reachable: Vec<bool>,
}

impl Cpt {
    /// Uniform table over the allowed cells of each row.
    pub fn new(
        name: impl Into<String>,
        child: impl Into<String>,
        parents: Vec<(String, usize)>,
        child_card: usize,
        allowed: impl Fn(&[usize], usize) -> bool,
        reachable: impl Fn(&[usize]) -> bool,
    ) -> Self {
        let (parents, parent_cards): (Vec<String>, Vec<usize>) = parents.into_iter().unzip();
        let rows: usize = parent_cards.iter().product();
        let mut cpt = Cpt {
            name: name.into(),
            child: child.into(),
            parents,
            parent_cards,
            child_card,
            table: vec![0.0; rows * child_card],
            allowed: vec![false; rows * child_card],
            reachable: vec![false; rows],
        };
        let mut config = vec![0; cpt.parent_cards.len()];
        for row in 0..rows {
            cpt.decode_row(row, &mut config);
            cpt.reachable[row] = reachable(&config);
            for v in 0..child_card {
                cpt.allowed[row * child_card + v] = allowed(&config, v);
            }
        }
        cpt.reset_uniform();
        cpt
    }

    pub fn rows(&self) -> usize {
        self.reachable.len()
    }

    pub fn row_index(&self, config: &[usize]) -> usize {
        debug_assert_eq!(config.len(), self.parent_cards.len());
        config
            .iter()
            .zip(&self.parent_cards)
            .fold(0, |acc, (&v, &card)| acc * card + v)
    }

    pub fn decode_row(&self, mut row: usize, config: &mut [usize]) {
        for (slot, &card) in config.iter_mut().zip(&self.parent_cards).rev() {
            *slot = row % card;
            row /= card;
        }
    }

    pub fn get(&self, row: usize, value: usize) -> f64 {
        self.table[row * self.child_card + value]
    }

    pub fn prob(&self, config: &[usize], value: usize) -> f64 {
        self.get(self.row_index(config), value)
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.table[row * self.child_card..(row + 1) * self.child_card]
    }

    pub fn row_mut(&mut self, row: usize) -> &mut [f64] {
        let c = self.child_card;
        &mut self.table[row * c..(row + 1) * c]
    }

    pub fn allowed(&self, row: usize, value: usize) -> bool {
        self.allowed[row * self.child_card + value]
    }

    pub fn allowed_row(&self, row: usize) -> &[bool] {
        &self.allowed[row * self.child_card..(row + 1) * self.child_card]
    }

    pub fn is_reachable(&self, row: usize) -> bool {
        self.reachable[row]
    }

    pub fn values(&self) -> &[f64] {
        &self.table
    }

    pub fn reset_uniform(&mut self) {
        for row in 0..self.rows() {
            let n = self.allowed_row(row).iter().filter(|&&a| a).count();
            let c = self.child_card;
            for v in 0..c {
                self.table[row * c + v] = if self.allowed[row * c + v] { 1.0 / n as f64 } else { 0.0 };
            }
        }
    }

    /// Replace a row; disallowed cells must be zero.
    pub fn set_row(&mut self, row: usize, values: &[f64]) -> Result<()> {
        if values.len() != self.child_card {
            return Err(Error::Validation(format!(
                "{}: row {row} has {} values, expected {}",
                self.name,
                values.len(),
                self.child_card
            )));
        }
        self.row_mut(row).copy_from_slice(values);
        Ok(())
    }

    /// Entries non-negative, structural zeros exactly zero, reachable rows
    /// summing to one.
    pub fn validate(&self) -> Result<()> {
        for row in 0..self.rows() {
            let mut sum = 0.0;
            for v in 0..self.child_card {
                let p = self.get(row, v);
                if !(p >= 0.0 && p.is_finite()) {
                    return Err(Error::Validation(format!("{}: entry ({row},{v}) = {p}", self.name)));
                }
                if !self.allowed(row, v) && p != 0.0 {
                    return Err(Error::Validation(format!(
                        "{}: structural zero ({row},{v}) holds {p}",
                        self.name
                    )));
                }
                sum += p;
            }
            if self.is_reachable(row) && (sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::Validation(format!("{}: row {row} sums to {sum}", self.name)));
            }
        }
        Ok(())
    }

    pub fn same_shape(&self, other: &Cpt) -> bool {
        self.parents == other.parents
            && self.parent_cards == other.parent_cards
            && self.child_card == other.child_card
            && self.allowed == other.allowed
    }
}
