//! Embedded 8x16 bitmap font covering printable ASCII. No external font
//! dependency: the glyphs below are the single source of truth for the
//! synthetic corpus, so generated datasets are reproducible byte for byte.
//!
//! Glyph cells are 8 columns by 16 rows, `#` = ink. The baseline sits on
//! row 12; descenders use rows 13-15.

use std::collections::HashMap;
use std::sync::OnceLock;

pub const GLYPH_W: usize = 8;
pub const GLYPH_H: usize = 16;

/// One glyph as row bitmasks, bit 7 = leftmost column.
pub type Glyph = [u8; GLYPH_H];

pub fn glyph(c: char) -> Option<&'static Glyph> {
    parsed().get(&c)
}

pub fn supports(c: char) -> bool {
    parsed().contains_key(&c)
}

/// Characters the font covers, sorted.
pub fn coverage() -> Vec<char> {
    let mut v: Vec<char> = parsed().keys().copied().collect();
    v.sort_unstable();
    v
}

fn parsed() -> &'static HashMap<char, Glyph> {
    static PARSED: OnceLock<HashMap<char, Glyph>> = OnceLock::new();
    PARSED.get_or_init(|| {
        let mut map = HashMap::with_capacity(GLYPHS.len());
        for (c, rows) in GLYPHS {
            let mut g: Glyph = [0; GLYPH_H];
            for (y, row) in rows.iter().enumerate() {
                assert_eq!(row.len(), GLYPH_W, "glyph {c:?} row {y} has wrong width");
                let mut bits = 0u8;
                for (x, cell) in row.bytes().enumerate() {
                    match cell {
                        b'#' => bits |= 1 << (7 - x),
                        b'.' => {}
                        other => panic!("glyph {c:?} row {y} has invalid cell {other:?}"),
                    }
                }
                g[y] = bits;
            }
            let prev = map.insert(*c, g);
            assert!(prev.is_none(), "glyph {c:?} defined twice");
        }
        map
    })
}

#[rustfmt::skip]
const GLYPHS: &[(char, [&str; 16])] = &[
    (' ', [
        "........", "........", "........", "........",
        "........", "........", "........", "........",
        "........", "........", "........", "........",
        "........", "........", "........", "........",
    ]),
    ('a', [
        "........", "........", "........", "........",
        "........", "........", "..####..", ".#....#.",
        "......#.", ".######.", ".#....#.", ".#...##.",
        "..###.#.", "........", "........", "........",
    ]),
    ('b', [
        "........", "........", ".#......", ".#......",
        ".#......", ".#......", ".#.###..", ".##...#.",
        ".#....#.", ".#....#.", ".#....#.", ".##...#.",
        ".#.###..", "........", "........", "........",
    ]),
    ('c', [
        "........", "........", "........", "........",
        "........", "........", "..####..", ".#....#.",
        ".#......", ".#......", ".#......", ".#....#.",
        "..####..", "........", "........", "........",
    ]),
    ('d', [
        "........", "........", "......#.", "......#.",
        "......#.", "......#.", "..###.#.", ".#...##.",
        ".#....#.", ".#....#.", ".#....#.", ".#...##.",
        "..###.#.", "........", "........", "........",
    ]),
    ('e', [
        "........", "........", "........", "........",
        "........", "........", "..####..", ".#....#.",
        ".#....#.", ".######.", ".#......", ".#....#.",
        "..####..", "........", "........", "........",
    ]),
    ('f', [
        "........", "........", "...###..", "..#.....",
        "..#.....", "..#.....", ".#####..", "..#.....",
        "..#.....", "..#.....", "..#.....", "..#.....",
        "..#.....", "........", "........", "........",
    ]),
    ('g', [
        "........", "........", "........", "........",
        "........", "........", "..###.#.", ".#...##.",
        ".#....#.", ".#....#.", ".#...##.", "..###.#.",
        "......#.", "......#.", ".#....#.", "..####..",
    ]),
    ('h', [
        "........", "........", ".#......", ".#......",
        ".#......", ".#......", ".#.###..", ".##...#.",
        ".#....#.", ".#....#.", ".#....#.", ".#....#.",
        ".#....#.", "........", "........", "........",
    ]),
    ('i', [
        "........", "........", "........", "...#....",
        "........", "........", "..##....", "...#....",
        "...#....", "...#....", "...#....", "...#....",
        "..###...", "........", "........", "........",
    ]),
    ('j', [
        "........", "........", "........", "....#...",
        "........", "........", "...##...", "....#...",
        "....#...", "....#...", "....#...", "....#...",
        "....#...", "....#...", ".#..#...", "..##....",
    ]),
    ('k', [
        "........", "........", ".#......", ".#......",
        ".#......", ".#......", ".#...#..", ".#..#...",
        ".#.#....", ".###....", ".#..#...", ".#...#..",
        ".#....#.", "........", "........", "........",
    ]),
    ('l', [
        "........", "........", "..##....", "...#....",
        "...#....", "...#....", "...#....", "...#....",
        "...#....", "...#....", "...#....", "...#....",
        "..###...", "........", "........", "........",
    ]),
    ('m', [
        "........", "........", "........", "........",
        "........", "........", ".##.##..", ".#.#..#.",
        ".#.#..#.", ".#.#..#.", ".#.#..#.", ".#.#..#.",
        ".#.#..#.", "........", "........", "........",
    ]),
    ('n', [
        "........", "........", "........", "........",
        "........", "........", ".#.###..", ".##...#.",
        ".#....#.", ".#....#.", ".#....#.", ".#....#.",
        ".#....#.", "........", "........", "........",
    ]),
    ('o', [
        "........", "........", "........", "........",
        "........", "........", "..####..", ".#....#.",
        ".#....#.", ".#....#.", ".#....#.", ".#....#.",
        "..####..", "........", "........", "........",
    ]),
    ('p', [
        "........", "........", "........", "........",
        "........", "........", ".#.###..", ".##...#.",
        ".#....#.", ".#....#.", ".#....#.", ".##...#.",
        ".#.###..", ".#......", ".#......", ".#......",
    ]),
    ('q', [
        "........", "........", "........", "........",
        "........", "........", "..###.#.", ".#...##.",
        ".#....#.", ".#....#.", ".#....#.", ".#...##.",
        "..###.#.", "......#.", "......#.", "......#.",
    ]),
    ('r', [
        "........", "........", "........", "........",
        "........", "........", ".#.###..", ".##...#.",
        ".#......", ".#......", ".#......", ".#......",
        ".#......", "........", "........", "........",
    ]),
    ('s', [
        "........", "........", "........", "........",
        "........", "........", "..####..", ".#....#.",
        ".#......", "..####..", "......#.", ".#....#.",
        "..####..", "........", "........", "........",
    ]),
    ('t', [
        "........", "........", "........", "..#.....",
        "..#.....", "..#.....", ".#####..", "..#.....",
        "..#.....", "..#.....", "..#.....", "..#...#.",
        "...###..", "........", "........", "........",
    ]),
    ('u', [
        "........", "........", "........", "........",
        "........", "........", ".#....#.", ".#....#.",
        ".#....#.", ".#....#.", ".#....#.", ".#...##.",
        "..###.#.", "........", "........", "........",
    ]),
    ('v', [
        "........", "........", "........", "........",
        "........", "........", ".#....#.", ".#....#.",
        ".#....#.", "..#..#..", "..#..#..", "...##...",
        "...##...", "........", "........", "........",
    ]),
    ('w', [
        "........", "........", "........", "........",
        "........", "........", "#..#..#.", "#..#..#.",
        "#..#..#.", "#..#..#.", "#..#..#.", "#..#..#.",
        ".##.##..", "........", "........", "........",
    ]),
    ('x', [
        "........", "........", "........", "........",
        "........", "........", "........", ".#....#.",
        "..#..#..", "...##...", "...##...", "..#..#..",
        ".#....#.", "........", "........", "........",
    ]),
    ('y', [
        "........", "........", "........", "........",
        "........", "........", ".#....#.", ".#....#.",
        ".#....#.", ".#....#.", ".#...##.", "..###.#.",
        "......#.", "......#.", ".#....#.", "..####..",
    ]),
    ('z', [
        "........", "........", "........", "........",
        "........", "........", ".######.", "......#.",
        ".....#..", "....#...", "...#....", "..#.....",
        ".######.", "........", "........", "........",
    ]),
    ('A', [
        "........", "........", "...##...", "...##...",
        "..#..#..", "..#..#..", "..#..#..", ".#....#.",
        ".######.", ".#....#.", ".#....#.", ".#....#.",
        ".#....#.", "........", "........", "........",
    ]),
    ('B', [
        "........", "........", ".#####..", ".#....#.",
        ".#....#.", ".#....#.", ".#####..", ".#....#.",
        ".#....#.", ".#....#.", ".#....#.", ".#....#.",
        ".#####..", "........", "........", "........",
    ]),
    ('C', [
        "........", "........", "..####..", ".#....#.",
        ".#......", ".#......", ".#......", ".#......",
        ".#......", ".#......", ".#......", ".#....#.",
        "..####..", "........", "........", "........",
    ]),
    ('D', [
        "........", "........", ".####...", ".#...#..",
        ".#....#.", ".#....#.", ".#....#.", ".#....#.",
        ".#....#.", ".#....#.", ".#....#.", ".#...#..",
        ".####...", "........", "........", "........",
    ]),
    ('E', [
        "........", "........", ".######.", ".#......",
        ".#......", ".#......", ".#####..", ".#......",
        ".#......", ".#......", ".#......", ".#......",
        ".######.", "........", "........", "........",
    ]),
    ('F', [
        "........", "........", ".######.", ".#......",
        ".#......", ".#......", ".#####..", ".#......",
        ".#......", ".#......", ".#......", ".#......",
        ".#......", "........", "........", "........",
    ]),
    ('G', [
        "........", "........", "..####..", ".#....#.",
        ".#......", ".#......", ".#......", ".#..###.",
        ".#....#.", ".#....#.", ".#....#.", ".#...##.",
        "..###.#.", "........", "........", "........",
    ]),
    ('H', [
        "........", "........", ".#....#.", ".#....#.",
        ".#....#.", ".#....#.", ".######.", ".#....#.",
        ".#....#.", ".#....#.", ".#....#.", ".#....#.",
        ".#....#.", "........", "........", "........",
    ]),
    ('I', [
        "........", "........", "..###...", "...#....",
        "...#....", "...#....", "...#....", "...#....",
        "...#....", "...#....", "...#....", "...#....",
        "..###...", "........", "........", "........",
    ]),
    ('J', [
        "........", "........", "...####.", ".....#..",
        ".....#..", ".....#..", ".....#..", ".....#..",
        ".....#..", ".....#..", ".#...#..", ".#...#..",
        "..###...", "........", "........", "........",
    ]),
    ('K', [
        "........", "........", ".#....#.", ".#...#..",
        ".#..#...", ".#.#....", ".##.....", ".##.....",
        ".#.#....", ".#..#...", ".#...#..", ".#....#.",
        ".#....#.", "........", "........", "........",
    ]),
    ('L', [
        "........", "........", ".#......", ".#......",
        ".#......", ".#......", ".#......", ".#......",
        ".#......", ".#......", ".#......", ".#......",
        ".######.", "........", "........", "........",
    ]),
    ('M', [
        "........", "........", ".#....#.", ".##..##.",
        ".#.##.#.", ".#.##.#.", ".#....#.", ".#....#.",
        ".#....#.", ".#....#.", ".#....#.", ".#....#.",
        ".#....#.", "........", "........", "........",
    ]),
    ('N', [
        "........", "........", ".#....#.", ".##...#.",
        ".#.#..#.", ".#.#..#.", ".#..#.#.", ".#..#.#.",
        ".#...##.", ".#...##.", ".#....#.", ".#....#.",
        ".#....#.", "........", "........", "........",
    ]),
    ('O', [
        "........", "........", "..####..", ".#....#.",
        ".#....#.", ".#....#.", ".#....#.", ".#....#.",
        ".#....#.", ".#....#.", ".#....#.", ".#....#.",
        "..####..", "........", "........", "........",
    ]),
    ('P', [
        "........", "........", ".#####..", ".#....#.",
        ".#....#.", ".#....#.", ".#####..", ".#......",
        ".#......", ".#......", ".#......", ".#......",
        ".#......", "........", "........", "........",
    ]),
    ('Q', [
        "........", "........", "..####..", ".#....#.",
        ".#....#.", ".#....#.", ".#....#.", ".#....#.",
        ".#....#.", ".#....#.", ".#..#.#.", ".#...#..",
        "..###.#.", "........", "........", "........",
    ]),
    ('R', [
        "........", "........", ".#####..", ".#....#.",
        ".#....#.", ".#....#.", ".#####..", ".#.#....",
        ".#..#...", ".#..#...", ".#...#..", ".#...#..",
        ".#....#.", "........", "........", "........",
    ]),
    ('S', [
        "........", "........", "..####..", ".#....#.",
        ".#......", ".#......", "..###...", ".....#..",
        "......#.", "......#.", "......#.", ".#....#.",
        "..####..", "........", "........", "........",
    ]),
    ('T', [
        "........", "........", ".######.", "...#....",
        "...#....", "...#....", "...#....", "...#....",
        "...#....", "...#....", "...#....", "...#....",
        "...#....", "........", "........", "........",
    ]),
    ('U', [
        "........", "........", ".#....#.", ".#....#.",
        ".#....#.", ".#....#.", ".#....#.", ".#....#.",
        ".#....#.", ".#....#.", ".#....#.", ".#....#.",
        "..####..", "........", "........", "........",
    ]),
    ('V', [
        "........", "........", ".#....#.", ".#....#.",
        ".#....#.", ".#....#.", ".#....#.", "..#..#..",
        "..#..#..", "..#..#..", "..#..#..", "...##...",
        "...##...", "........", "........", "........",
    ]),
    ('W', [
        "........", "........", ".#....#.", ".#....#.",
        ".#....#.", ".#....#.", ".#....#.", ".#....#.",
        ".#.##.#.", ".#.##.#.", ".##..##.", ".#....#.",
        ".#....#.", "........", "........", "........",
    ]),
    ('X', [
        "........", "........", ".#....#.", ".#....#.",
        "..#..#..", "..#..#..", "...##...", "...##...",
        "..#..#..", "..#..#..", ".#....#.", ".#....#.",
        ".#....#.", "........", "........", "........",
    ]),
    ('Y', [
        "........", "........", ".#....#.", ".#....#.",
        "..#..#..", "..#..#..", "...##...", "...#....",
        "...#....", "...#....", "...#....", "...#....",
        "...#....", "........", "........", "........",
    ]),
    ('Z', [
        "........", "........", ".######.", "......#.",
        ".....#..", ".....#..", "....#...", "....#...",
        "...#....", "...#....", "..#.....", "..#.....",
        ".######.", "........", "........", "........",
    ]),
    ('0', [
        "........", "........", "..####..", ".#....#.",
        ".#...##.", ".#..#.#.", ".#..#.#.", ".#.#..#.",
        ".#.#..#.", ".##...#.", ".#....#.", ".#....#.",
        "..####..", "........", "........", "........",
    ]),
    ('1', [
        "........", "........", "...#....", "..##....",
        ".#.#....", "...#....", "...#....", "...#....",
        "...#....", "...#....", "...#....", "...#....",
        ".#####..", "........", "........", "........",
    ]),
    ('2', [
        "........", "........", "..####..", ".#....#.",
        "......#.", "......#.", ".....#..", "....#...",
        "...#....", "..#.....", ".#......", ".#......",
        ".######.", "........", "........", "........",
    ]),
    ('3', [
        "........", "........", "..####..", ".#....#.",
        "......#.", "......#.", "...###..", "......#.",
        "......#.", "......#.", "......#.", ".#....#.",
        "..####..", "........", "........", "........",
    ]),
    ('4', [
        "........", "........", "....##..", "...#.#..",
        "..#..#..", ".#...#..", ".#...#..", ".######.",
        ".....#..", ".....#..", ".....#..", ".....#..",
        ".....#..", "........", "........", "........",
    ]),
    ('5', [
        "........", "........", ".######.", ".#......",
        ".#......", ".#......", ".#####..", "......#.",
        "......#.", "......#.", "......#.", ".#....#.",
        "..####..", "........", "........", "........",
    ]),
    ('6', [
        "........", "........", "..####..", ".#....#.",
        ".#......", ".#......", ".#####..", ".##...#.",
        ".#....#.", ".#....#.", ".#....#.", ".#....#.",
        "..####..", "........", "........", "........",
    ]),
    ('7', [
        "........", "........", ".######.", "......#.",
        ".....#..", ".....#..", "....#...", "....#...",
        "...#....", "...#....", "..#.....", "..#.....",
        "..#.....", "........", "........", "........",
    ]),
    ('8', [
        "........", "........", "..####..", ".#....#.",
        ".#....#.", ".#....#.", "..####..", ".#....#.",
        ".#....#.", ".#....#.", ".#....#.", ".#....#.",
        "..####..", "........", "........", "........",
    ]),
    ('9', [
        "........", "........", "..####..", ".#....#.",
        ".#....#.", ".#....#.", ".#...##.", "..###.#.",
        "......#.", "......#.", "......#.", ".#....#.",
        "..####..", "........", "........", "........",
    ]),
    ('.', [
        "........", "........", "........", "........",
        "........", "........", "........", "........",
        "........", "........", "...##...", "...##...",
        "........", "........", "........", "........",
    ]),
    (',', [
        "........", "........", "........", "........",
        "........", "........", "........", "........",
        "........", "........", "...##...", "...##...",
        "....#...", "...#....", "........", "........",
    ]),
    (':', [
        "........", "........", "........", "........",
        "........", "...##...", "...##...", "........",
        "........", "........", "...##...", "...##...",
        "........", "........", "........", "........",
    ]),
    (';', [
        "........", "........", "........", "........",
        "........", "...##...", "...##...", "........",
        "........", "........", "...##...", "...##...",
        "....#...", "...#....", "........", "........",
    ]),
    ('!', [
        "........", "........", "...#....", "...#....",
        "...#....", "...#....", "...#....", "...#....",
        "...#....", "........", "...##...", "...##...",
        "........", "........", "........", "........",
    ]),
    ('?', [
        "........", "........", "..####..", ".#....#.",
        "......#.", "......#.", ".....#..", "....#...",
        "...#....", "........", "...##...", "...##...",
        "........", "........", "........", "........",
    ]),
    ('\'', [
        "........", "........", "...#....", "...#....",
        "..#.....", "........", "........", "........",
        "........", "........", "........", "........",
        "........", "........", "........", "........",
    ]),
    ('"', [
        "........", "........", "..#..#..", "..#..#..",
        "..#..#..", "........", "........", "........",
        "........", "........", "........", "........",
        "........", "........", "........", "........",
    ]),
    ('-', [
        "........", "........", "........", "........",
        "........", "........", "........", ".#####..",
        "........", "........", "........", "........",
        "........", "........", "........", "........",
    ]),
    ('_', [
        "........", "........", "........", "........",
        "........", "........", "........", "........",
        "........", "........", "........", "........",
        "........", "........", "########", "........",
    ]),
    ('(', [
        "........", "....#...", "...#....", "..#.....",
        "..#.....", ".#......", ".#......", ".#......",
        ".#......", "..#.....", "..#.....", "...#....",
        "....#...", "........", "........", "........",
    ]),
    (')', [
        "........", "...#....", "....#...", ".....#..",
        ".....#..", "......#.", "......#.", "......#.",
        "......#.", ".....#..", ".....#..", "....#...",
        "...#....", "........", "........", "........",
    ]),
    ('[', [
        "........", "..###...", "..#.....", "..#.....",
        "..#.....", "..#.....", "..#.....", "..#.....",
        "..#.....", "..#.....", "..#.....", "..#.....",
        "..###...", "........", "........", "........",
    ]),
    (']', [
        "........", "...###..", ".....#..", ".....#..",
        ".....#..", ".....#..", ".....#..", ".....#..",
        ".....#..", ".....#..", ".....#..", ".....#..",
        "...###..", "........", "........", "........",
    ]),
    ('{', [
        "........", "....##..", "...#....", "...#....",
        "...#....", "...#....", "..#.....", "...#....",
        "...#....", "...#....", "...#....", "...#....",
        "....##..", "........", "........", "........",
    ]),
    ('}', [
        "........", "..##....", "....#...", "....#...",
        "....#...", "....#...", ".....#..", "....#...",
        "....#...", "....#...", "....#...", "....#...",
        "..##....", "........", "........", "........",
    ]),
    ('<', [
        "........", "........", "........", ".....#..",
        "....#...", "...#....", "..#.....", ".#......",
        "..#.....", "...#....", "....#...", ".....#..",
        "........", "........", "........", "........",
    ]),
    ('>', [
        "........", "........", "........", "..#.....",
        "...#....", "....#...", ".....#..", "......#.",
        ".....#..", "....#...", "...#....", "..#.....",
        "........", "........", "........", "........",
    ]),
    ('/', [
        "........", "......#.", "......#.", ".....#..",
        ".....#..", "....#...", "....#...", "...#....",
        "...#....", "..#.....", "..#.....", ".#......",
        ".#......", "........", "........", "........",
    ]),
    ('\\', [
        "........", ".#......", ".#......", "..#.....",
        "..#.....", "...#....", "...#....", "....#...",
        "....#...", ".....#..", ".....#..", "......#.",
        "......#.", "........", "........", "........",
    ]),
    ('|', [
        "........", "...#....", "...#....", "...#....",
        "...#....", "...#....", "...#....", "...#....",
        "...#....", "...#....", "...#....", "...#....",
        "...#....", "........", "........", "........",
    ]),
    ('*', [
        "........", "........", "........", "...#....",
        ".#.#.#..", "..###...", ".#.#.#..", "...#....",
        "........", "........", "........", "........",
        "........", "........", "........", "........",
    ]),
    ('+', [
        "........", "........", "........", "........",
        "...#....", "...#....", ".#####..", "...#....",
        "...#....", "........", "........", "........",
        "........", "........", "........", "........",
    ]),
    ('=', [
        "........", "........", "........", "........",
        "........", ".#####..", "........", ".#####..",
        "........", "........", "........", "........",
        "........", "........", "........", "........",
    ]),
    ('#', [
        "........", "........", "..#..#..", "..#..#..",
        ".######.", "..#..#..", "..#..#..", "..#..#..",
        ".######.", "..#..#..", "..#..#..", "........",
        "........", "........", "........", "........",
    ]),
    ('$', [
        "........", "...#....", "..####..", ".#.#..#.",
        ".#.#....", ".#.#....", "..###...", "...#.#..",
        "...#..#.", ".#.#..#.", ".#.#..#.", "..####..",
        "...#....", "........", "........", "........",
    ]),
    ('%', [
        "........", "........", ".##...#.", ".##...#.",
        ".....#..", "....#...", "...#....", "...#....",
        "..#.....", ".#......", ".#...##.", "#....##.",
        "........", "........", "........", "........",
    ]),
    ('&', [
        "........", "........", "..##....", ".#..#...",
        ".#..#...", ".#.#....", "..#.....", ".#.#..#.",
        ".#..##..", ".#..##..", ".#...#..", "..###.#.",
        "........", "........", "........", "........",
    ]),
    ('@', [
        "........", "........", "..####..", ".#....#.",
        ".#.##.#.", ".#.#.##.", ".#.#..#.", ".#.#..#.",
        ".#.####.", ".#......", ".#....#.", "..####..",
        "........", "........", "........", "........",
    ]),
    ('^', [
        "........", "...#....", "..#.#...", ".#...#..",
        "........", "........", "........", "........",
        "........", "........", "........", "........",
        "........", "........", "........", "........",
    ]),
    ('~', [
        "........", "........", "........", "........",
        "........", "........", "..#.....", ".#.#..#.",
        ".#..##..", "........", "........", "........",
        "........", "........", "........", "........",
    ]),
    ('`', [
        "........", "...#....", "....#...", "........",
        "........", "........", "........", "........",
        "........", "........", "........", "........",
        "........", "........", "........", "........",
    ]),
];
