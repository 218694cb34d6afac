use crate::error::{Error, Result};

/// JPEG-style zigzag over a `width x height` grid, as row-major indices.
///
/// Anti-diagonals `x + y = s` are walked in increasing `s`; odd diagonals
/// run top to bottom, even ones bottom to top.
pub fn zigzag_order(width: usize, height: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(width * height);
    if width == 0 || height == 0 {
        return order;
    }
    for s in 0..width + height - 1 {
        let y_lo = s.saturating_sub(width - 1);
        let y_hi = s.min(height - 1);
        let diagonal = (y_lo..=y_hi).map(|y| y * width + (s - y));
        if s % 2 == 1 {
            order.extend(diagonal);
        } else {
            order.extend(diagonal.rev());
        }
    }
    order
}

/// First `budget` entries of `values` in zigzag order.
pub fn zigzag_take(values: &[f64], width: usize, height: usize, budget: usize) -> Result<Vec<f64>> {
    if values.len() != width * height {
        return Err(Error::DimensionMismatch { expected: width * height, actual: values.len() });
    }
    if budget > values.len() {
        return Err(Error::invalid(format!(
            "coefficient budget {budget} exceeds the {} available",
            values.len()
        )));
    }
    Ok(zigzag_order(width, height)
        .into_iter()
        .take(budget)
        .map(|i| values[i])
        .collect())
}
