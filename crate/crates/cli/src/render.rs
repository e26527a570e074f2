//! Text and PPM renderings of levels.

use std::sync::Arc;

use trp_core::{
    parse_level, serialize_level, Category, Level, LevelError, PlaythroughRecord, TokenAlphabet,
};

/// The level text, a blank line, then one legend line per token present.
pub fn ascii(level: &Level) -> String {
    let mut s = serialize_level(level);
    s.push('\n');
    for tok in level.alphabet().tokens() {
        if level.count(tok.symbol) == 0 {
            continue;
        }
        let cats: Vec<String> = tok.categories.iter().map(|c| c.to_string()).collect();
        s.push_str(&format!("{}  {}\n", tok.symbol, cats.join(", ")));
    }
    s
}

/// Reads the level back out of an [`ascii`] rendering.
pub fn parse_ascii(text: &str, alphabet: Arc<TokenAlphabet>) -> Result<Level, LevelError> {
    let grid = text.split("\n\n").next().unwrap_or("");
    parse_level(grid, alphabet)
}

/// `o` on the executed path, `*` elsewhere in the search tree. Only empty
/// cells are marked.
pub fn overlay(level: &Level, record: &PlaythroughRecord) -> String {
    let mut rows: Vec<Vec<char>> = (0..level.height()).map(|r| level.row(r).to_vec()).collect();
    let mut mark = |p: trp_core::Position, c: char| {
        if level.in_bounds(p) && level.is_empty_at(p) {
            rows[p.row][p.col] = c;
        }
    };
    for &p in &record.visited {
        mark(p, '*');
    }
    for &p in &record.executed_path {
        mark(p, 'o');
    }
    let mut s = String::new();
    for row in rows {
        s.extend(row);
        s.push('\n');
    }
    s
}

fn base_color(categories: &std::collections::BTreeSet<Category>) -> [u8; 3] {
    let has = |c| categories.contains(&c);
    if has(Category::Pit) {
        [20, 20, 28]
    } else if has(Category::Threat) {
        [200, 40, 40]
    } else if has(Category::PlayerStart) {
        [40, 90, 220]
    } else if has(Category::Key) {
        [240, 220, 80]
    } else if has(Category::Door) {
        [140, 90, 40]
    } else if has(Category::Goal) {
        [230, 170, 20]
    } else if has(Category::Solid) {
        [100, 100, 110]
    } else {
        [235, 235, 225]
    }
}

/// One colour per token: a category colour, darkened by a tenth for each
/// earlier token that shares it.
pub fn palette(alphabet: &TokenAlphabet) -> Vec<(char, [u8; 3])> {
    let mut seen: Vec<[u8; 3]> = Vec::new();
    alphabet
        .tokens()
        .iter()
        .map(|t| {
            let base = base_color(&t.categories);
            let k = seen.iter().filter(|&&c| c == base).count() as i32;
            seen.push(base);
            let shade = base.map(|v| (f32::from(v) * 0.9f32.powi(k)).round() as u8);
            (t.symbol, shade)
        })
        .collect()
}

/// Binary PPM (P6), `scale` pixels per tile.
pub fn ppm(level: &Level, scale: usize) -> Vec<u8> {
    let scale = scale.max(1);
    let colors = palette(level.alphabet());
    let color = |c: char| {
        colors
            .iter()
            .find(|x| x.0 == c)
            .map_or([255, 0, 255], |x| x.1)
    };
    let (w, h) = (level.width() * scale, level.height() * scale);
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.reserve(w * h * 3);
    for r in 0..level.height() {
        let row: Vec<[u8; 3]> = level.row(r).iter().map(|&c| color(c)).collect();
        for _ in 0..scale {
            for px in &row {
                for _ in 0..scale {
                    out.extend_from_slice(px);
                }
            }
        }
    }
    out
}
