use super::PipelineError;
use crate::level::BinarySketch;
use crate::mcts::PlaythroughRecord;

/// Carves the recorded positions out of a solid sketch: visited cells are 0,
/// every other cell is 1. Positions outside the grid are ignored.
pub fn reconstruct_sketch(
    record: &PlaythroughRecord,
    width: usize,
    height: usize,
) -> Result<BinarySketch, PipelineError> {
    if record.visited.is_empty() {
        return Err(PipelineError::EmptyRecord);
    }
    let mut sketch = BinarySketch::filled(width, height, 1);
    for &p in &record.visited {
        if p.col < width && p.row < height {
            sketch.set(p, 0);
        }
    }
    Ok(sketch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::level::Position;

    #[test]
    fn full_coverage_is_all_zero() {
        let mut r = PlaythroughRecord::default();
        for row in 0..3 {
            for col in 0..4 {
                r.visited.insert(Position::new(col, row));
            }
        }
        let s = reconstruct_sketch(&r, 4, 3).unwrap();
        assert_eq!(s.ones(), 0);
    }

    #[test]
    fn empty_record_is_rejected() {
        assert_eq!(
            reconstruct_sketch(&PlaythroughRecord::default(), 13, 9),
            Err(PipelineError::EmptyRecord)
        );
    }

    #[test]
    fn one_row_carves_thirteen_cells() {
        let mut r = PlaythroughRecord::default();
        for col in 0..13 {
            r.visited.insert(Position::new(col, 4));
        }
        let s = reconstruct_sketch(&r, 13, 9).unwrap();
        assert_eq!(s.zeros(), r.visited.len());
        assert_eq!(s.zeros(), 13);
        assert!((0..13).all(|c| s.get(Position::new(c, 4)) == 0));
    }
}
