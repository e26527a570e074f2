//! Example-driven binary space partition.
//!
//! The sketch is recursively split into segments no larger than `s` on
//! either side. Each segment is then matched against every same-sized
//! window of the binarized source; one of the best-scoring windows is
//! chosen uniformly and its tokens are copied into the output.

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::level::{binarize, BinarySketch, Level, Position};
use crate::rng::{self, RandomStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Segment {
    pub origin: Position,
    pub width: usize,
    pub height: usize,
}

impl Segment {
    pub fn area(&self) -> usize {
        self.width * self.height
    }

    pub fn contains(&self, p: Position) -> bool {
        p.col >= self.origin.col
            && p.col < self.origin.col + self.width
            && p.row >= self.origin.row
            && p.row < self.origin.row + self.height
    }

    pub fn positions(&self) -> impl Iterator<Item = Position> + '_ {
        (self.origin.row..self.origin.row + self.height).flat_map(move |r| {
            (self.origin.col..self.origin.col + self.width).map(move |c| Position::new(c, r))
        })
    }
}

/// Splits a `width`x`height` grid until every piece has both sides `<= s`.
/// A region too large on both axes is split across its longer side (width
/// on ties) at a uniformly random interior line.
pub fn partition_sketch(
    width: usize,
    height: usize,
    s: usize,
    rng: &mut RandomStream,
) -> Vec<Segment> {
    let s = s.max(1);
    let mut out = Vec::new();
    let mut stack = vec![Segment {
        origin: Position::new(0, 0),
        width,
        height,
    }];
    while let Some(seg) = stack.pop() {
        let too_wide = seg.width > s;
        let too_tall = seg.height > s;
        if !too_wide && !too_tall {
            out.push(seg);
            continue;
        }
        let split_cols = too_wide && (!too_tall || seg.width >= seg.height);
        if split_cols {
            let k = 1 + rng::index(rng, seg.width - 1);
            stack.push(Segment {
                origin: Position::new(seg.origin.col + k, seg.origin.row),
                width: seg.width - k,
                height: seg.height,
            });
            stack.push(Segment { width: k, ..seg });
        } else {
            let k = 1 + rng::index(rng, seg.height - 1);
            stack.push(Segment {
                origin: Position::new(seg.origin.col, seg.origin.row + k),
                width: seg.width,
                height: seg.height - k,
            });
            stack.push(Segment { height: k, ..seg });
        }
    }
    out
}

/// Number of cells on which two equally-sized sketches agree, computed as
/// the sum of `1 - sign(a - b)^2`.
pub fn binary_similarity(a: &BinarySketch, b: &BinarySketch) -> Result<usize, PipelineError> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(PipelineError::DimensionMismatch(
            a.width(),
            a.height(),
            b.width(),
            b.height(),
        ));
    }
    Ok(similarity_cells(a.cells(), b.cells()))
}

fn similarity_cells(a: &[u8], b: &[u8]) -> usize {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let sign = (x as i32 - y as i32).signum();
            (1 - sign * sign) as usize
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentMatch {
    /// Top-left corner of the chosen source window.
    pub source_origin: Position,
    pub score: usize,
    /// Number of windows sharing the best score.
    pub ties: usize,
    /// Row-major tokens of the chosen window.
    pub patch: Vec<char>,
}

/// Best-scoring source window for the part of `sketch` under `seg`.
pub fn match_segment(
    sketch: &BinarySketch,
    seg: &Segment,
    source: &Level,
    rng: &mut RandomStream,
) -> Result<SegmentMatch, PipelineError> {
    match_against(sketch, seg, source, &binarize(source), rng)
}

fn match_against(
    sketch: &BinarySketch,
    seg: &Segment,
    source: &Level,
    source_bin: &BinarySketch,
    rng: &mut RandomStream,
) -> Result<SegmentMatch, PipelineError> {
    if seg.width > source.width() || seg.height > source.height() {
        return Err(PipelineError::SegmentLargerThanSource {
            seg_w: seg.width,
            seg_h: seg.height,
            src_w: source.width(),
            src_h: source.height(),
        });
    }
    let target = sketch.window(seg.origin, seg.width, seg.height);
    let target = target.cells();
    let sw = source_bin.width();
    let cells = source_bin.cells();

    let mut best = 0;
    let mut winners: Vec<Position> = Vec::new();
    for r in 0..=source.height() - seg.height {
        for c in 0..=source.width() - seg.width {
            let mut score = 0;
            for dr in 0..seg.height {
                let row = &cells[(r + dr) * sw + c..(r + dr) * sw + c + seg.width];
                score += similarity_cells(&target[dr * seg.width..(dr + 1) * seg.width], row);
            }
            if score > best || winners.is_empty() {
                best = score;
                winners.clear();
                winners.push(Position::new(c, r));
            } else if score == best {
                winners.push(Position::new(c, r));
            }
        }
    }
    let origin = winners[rng::index(rng, winners.len())];
    Ok(SegmentMatch {
        source_origin: origin,
        score: best,
        ties: winners.len(),
        patch: source.window(origin, seg.width, seg.height),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub segment: Segment,
    pub source_origin: Position,
    pub score: usize,
}

#[derive(Debug, Clone)]
pub struct FillResult {
    pub level: Level,
    /// Segments in fill order with the windows chosen for them.
    pub placements: Vec<Placement>,
}

/// Fills `sketch` with windows of `source` (expected threat-free), largest
/// segments first, ties in row-major order of their origins.
pub fn fill(
    sketch: &BinarySketch,
    source: &Level,
    s: usize,
    rng: &mut RandomStream,
) -> Result<FillResult, PipelineError> {
    if sketch.width() != source.width() || sketch.height() != source.height() {
        return Err(PipelineError::DimensionMismatch(
            sketch.width(),
            sketch.height(),
            source.width(),
            source.height(),
        ));
    }
    let mut segments = partition_sketch(sketch.width(), sketch.height(), s, rng);
    segments.sort_by_key(|seg| (std::cmp::Reverse(seg.area()), seg.origin.row_major()));

    let source_bin = binarize(source);
    let mut level = Level::filled(source.width(), source.height(), source.alphabet().clone());
    let mut placements = Vec::with_capacity(segments.len());
    for seg in segments {
        let m = match_against(sketch, &seg, source, &source_bin, rng)?;
        for (p, &t) in seg.positions().zip(&m.patch) {
            level.set(p, t);
        }
        placements.push(Placement {
            segment: seg,
            source_origin: m.source_origin,
            score: m.score,
        });
    }
    Ok(FillResult { level, placements })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::test_support::dungeon_alphabet;
    use crate::level::parse_level;
    use crate::rng::stream;
    use proptest::prelude::*;

    const LEVEL1: &str = include_str!("../../data/dungeon/level1.lvl");

    fn sketch(w: usize, h: usize, cells: &[u8]) -> BinarySketch {
        BinarySketch::new(w, h, cells.to_vec()).unwrap()
    }

    fn brute_matches(a: &BinarySketch, b: &BinarySketch) -> usize {
        let mut n = 0;
        for r in 0..a.height() {
            for c in 0..a.width() {
                if a.get(Position::new(c, r)) == b.get(Position::new(c, r)) {
                    n += 1;
                }
            }
        }
        n
    }

    /// Checks disjointness, coverage and the size bound cell by cell.
    fn assert_tiling(segs: &[Segment], w: usize, h: usize, s: usize) {
        let mut hits = vec![0u32; w * h];
        for seg in segs {
            assert!(seg.width >= 1 && seg.height >= 1);
            assert!(seg.width <= s && seg.height <= s, "{seg:?} exceeds {s}");
            assert!(seg.origin.col + seg.width <= w && seg.origin.row + seg.height <= h);
            for p in seg.positions() {
                hits[p.row * w + p.col] += 1;
            }
        }
        assert!(hits.iter().all(|&n| n == 1));
    }

    #[test]
    fn similarity_examples() {
        let a = sketch(3, 3, &[0, 1, 0, 1, 1, 0, 0, 0, 1]);
        assert_eq!(binary_similarity(&a, &a).unwrap(), 9);
        let z = BinarySketch::filled(2, 5, 0);
        let o = BinarySketch::filled(2, 5, 1);
        assert_eq!(binary_similarity(&z, &o).unwrap(), 0);
        let s = sketch(2, 2, &[0, 1, 1, 0]);
        let l = sketch(2, 2, &[0, 0, 1, 1]);
        assert_eq!(binary_similarity(&s, &l).unwrap(), brute_matches(&s, &l));
        assert_eq!(binary_similarity(&s, &l).unwrap(), 2);
        assert!(matches!(
            binary_similarity(&z, &a),
            Err(PipelineError::DimensionMismatch(..))
        ));
    }

    #[test]
    fn partition_examples() {
        let mut rng = stream(3);
        let one = partition_sketch(4, 4, 4, &mut rng);
        assert_eq!(
            one,
            vec![Segment {
                origin: Position::new(0, 0),
                width: 4,
                height: 4
            }]
        );
        let segs = partition_sketch(16, 16, 8, &mut rng);
        assert_tiling(&segs, 16, 16, 8);
        assert_eq!(segs.iter().map(Segment::area).sum::<usize>(), 256);
        let unit = partition_sketch(13, 9, 1, &mut rng);
        assert_eq!(unit.len(), 117);
        assert_tiling(&unit, 13, 9, 1);
    }

    #[test]
    fn unique_window_is_always_chosen() {
        let src = parse_level("wwww\nw..w\nw.ww\nwwww\n", dungeon_alphabet()).unwrap();
        // the 2x2 pattern [0,0 / 0,1] occurs only at (1,1)
        let sk = sketch(2, 2, &[0, 0, 0, 1]);
        let seg = Segment {
            origin: Position::new(0, 0),
            width: 2,
            height: 2,
        };
        for seed in 0..20 {
            let m = match_segment(&sk, &seg, &src, &mut stream(seed)).unwrap();
            assert_eq!(m.source_origin, Position::new(1, 1));
            assert_eq!(m.patch, vec!['.', '.', '.', 'w']);
            assert_eq!(m.ties, 1);
        }
    }

    #[test]
    fn all_empty_source_matches_anywhere() {
        let src = parse_level("....\n....\n....\n", dungeon_alphabet()).unwrap();
        let sk = BinarySketch::filled(2, 2, 0);
        let seg = Segment {
            origin: Position::new(0, 0),
            width: 2,
            height: 2,
        };
        let m = match_segment(&sk, &seg, &src, &mut stream(0)).unwrap();
        assert_eq!(m.ties, 6);
        assert_eq!(m.patch, vec!['.'; 4]);
    }

    #[test]
    fn match_reaches_exhaustive_maximum_on_level1() {
        let src = parse_level(LEVEL1, dungeon_alphabet()).unwrap();
        let bin = binarize(&src);
        let target = sketch(2, 2, &[1, 1, 0, 0]);
        // exhaustive scan oracle
        let mut best = 0;
        for r in 0..=src.height() - 2 {
            for c in 0..=src.width() - 2 {
                best = best.max(brute_matches(
                    &target,
                    &bin.window(Position::new(c, r), 2, 2),
                ));
            }
        }
        let seg = Segment {
            origin: Position::new(0, 0),
            width: 2,
            height: 2,
        };
        for seed in 0..10 {
            let m = match_segment(&target, &seg, &src, &mut stream(seed)).unwrap();
            let patch = Level::from_grid(2, 2, m.patch.clone(), src.alphabet().clone()).unwrap();
            assert_eq!(brute_matches(&target, &binarize(&patch)), best);
            assert_eq!(m.score, best);
        }
    }

    #[test]
    fn oversized_segment_is_rejected() {
        let src = parse_level("..\n..\n", dungeon_alphabet()).unwrap();
        let sk = BinarySketch::filled(3, 3, 0);
        let seg = Segment {
            origin: Position::new(0, 0),
            width: 3,
            height: 1,
        };
        assert!(matches!(
            match_segment(&sk, &seg, &src, &mut stream(0)),
            Err(PipelineError::SegmentLargerThanSource { .. })
        ));
    }

    #[test]
    fn self_sketch_with_large_s_reproduces_source() {
        let src = parse_level(LEVEL1, dungeon_alphabet()).unwrap();
        let stripped = crate::level::strip_threats(&src, &['1', '2', '3'].into());
        let sk = binarize(&stripped);
        let out = fill(&sk, &stripped, 13, &mut stream(1)).unwrap();
        assert_eq!(out.placements.len(), 1);
        // the only full-size window is the source itself
        assert_eq!(out.placements[0].score, 117);
        assert_eq!(out.level, stripped);
    }

    #[test]
    fn unit_segments_respect_emptiness() {
        let src = parse_level(LEVEL1, dungeon_alphabet()).unwrap();
        let stripped = crate::level::strip_threats(&src, &['1', '2', '3'].into());
        let mut rng = stream(9);
        let cells: Vec<u8> = (0..117).map(|i| ((i * 7 + 3) % 5 == 0) as u8).collect();
        let sk = sketch(13, 9, &cells);
        let out = fill(&sk, &stripped, 1, &mut rng).unwrap();
        for p in out.level.positions() {
            assert_eq!(u8::from(!out.level.is_empty_at(p)), sk.get(p));
        }
    }

    #[test]
    fn empty_sketch_draws_from_best_windows() {
        let src = parse_level(LEVEL1, dungeon_alphabet()).unwrap();
        let stripped = crate::level::strip_threats(&src, &['1', '2', '3'].into());
        let sk = BinarySketch::filled(13, 9, 0);
        let out = fill(&sk, &stripped, 5, &mut stream(4)).unwrap();
        let bin = binarize(&stripped);
        for pl in &out.placements {
            let seg = pl.segment;
            let mut best = 0;
            for r in 0..=9 - seg.height {
                for c in 0..=13 - seg.width {
                    let w = bin.window(Position::new(c, r), seg.width, seg.height);
                    best = best.max(w.zeros());
                }
            }
            assert_eq!(pl.score, best);
        }
    }

    fn arb_pair() -> impl Strategy<Value = (BinarySketch, BinarySketch)> {
        (1usize..10, 1usize..10).prop_flat_map(|(w, h)| {
            (
                prop::collection::vec(0u8..2, w * h),
                prop::collection::vec(0u8..2, w * h),
            )
                .prop_map(move |(a, b)| (sketch(w, h, &a), sketch(w, h, &b)))
        })
    }

    proptest! {
        #[test]
        fn similarity_equals_brute_force((a, b) in arb_pair()) {
            prop_assert_eq!(binary_similarity(&a, &b).unwrap(), brute_matches(&a, &b));
            prop_assert_eq!(binary_similarity(&a, &b).unwrap(), binary_similarity(&b, &a).unwrap());
        }

        #[test]
        fn partition_is_a_tiling(w in 1usize..=64, h in 1usize..=64, s in 1usize..=16, seed in 0u64..1000) {
            let segs = partition_sketch(w, h, s, &mut stream(seed));
            assert_tiling(&segs, w, h, s);
        }

        #[test]
        fn filled_patches_come_from_source(seed in 0u64..500, s in 1usize..6) {
            let src = parse_level(LEVEL1, dungeon_alphabet()).unwrap();
            let stripped = crate::level::strip_threats(&src, &['1', '2', '3'].into());
            let mut rng = stream(seed);
            let cells: Vec<u8> = (0..117).map(|_| rng::index(&mut rng, 2) as u8).collect();
            let sk = sketch(13, 9, &cells);
            let out = fill(&sk, &stripped, s, &mut rng).unwrap();
            for pl in &out.placements {
                let seg = pl.segment;
                let got: Vec<char> = seg.positions().map(|p| out.level.get(p)).collect();
                prop_assert_eq!(got, stripped.window(pl.source_origin, seg.width, seg.height));
            }
        }
    }
}
