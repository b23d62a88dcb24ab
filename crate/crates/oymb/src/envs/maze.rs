//! 10×10 maze map: text format parsing, validation, and BFS reachability.
//!
//! Map files are 10 lines of 10 characters over `{#, ., S, E, M, H}`:
//! `#` wall, `.` open floor, `S` start, and `E`/`M`/`H` the easy, medium and
//! hard goal cells. Every marker must appear exactly once and every goal must
//! be reachable from the start.

use std::collections::VecDeque;

use thiserror::Error;

pub const GRID: usize = 10;

/// Shipped default map (also on disk at `maps/default.map`).
pub const DEFAULT_MAP: &str = include_str!("../../maps/default.map");

#[derive(Debug, Error)]
pub enum MapError {
    #[error("expected {GRID} lines, found {0}")]
    WrongLineCount(usize),
    #[error("line {line}: expected {GRID} characters, found {len}")]
    WrongLineLength { line: usize, len: usize },
    #[error("line {line}, column {col}: invalid character {ch:?}")]
    InvalidChar { line: usize, col: usize, ch: char },
    #[error("missing marker {0:?}")]
    MissingMarker(char),
    #[error("duplicate marker {0:?} at row {1}, column {2}")]
    DuplicateMarker(char, usize, usize),
    #[error("goal {name:?} at row {row}, column {col} is unreachable from the start")]
    UnreachableGoal { name: char, row: usize, col: usize },
}

/// Validated 10×10 maze: wall grid, start cell, and the three goal cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MazeMap {
    pub walls: [[bool; GRID]; GRID],
    pub start: (usize, usize),
    pub easy: (usize, usize),
    pub medium: (usize, usize),
    pub hard: (usize, usize),
}

impl MazeMap {
    /// Parses and validates a text map.
    pub fn parse(text: &str) -> Result<Self, MapError> {
        let lines: Vec<&str> = text.lines().collect();
        if lines.len() != GRID {
            return Err(MapError::WrongLineCount(lines.len()));
        }

        let mut walls = [[false; GRID]; GRID];
        let mut markers: [Option<(usize, usize)>; 4] = [None; 4];
        const MARKS: [char; 4] = ['S', 'E', 'M', 'H'];

        for (r, line) in lines.iter().enumerate() {
            let chars: Vec<char> = line.chars().collect();
            if chars.len() != GRID {
                return Err(MapError::WrongLineLength { line: r, len: chars.len() });
            }
            for (c, &ch) in chars.iter().enumerate() {
                match ch {
                    '#' => walls[r][c] = true,
                    '.' => {}
                    _ => {
                        let Some(k) = MARKS.iter().position(|&m| m == ch) else {
                            return Err(MapError::InvalidChar { line: r, col: c, ch });
                        };
                        if markers[k].is_some() {
                            return Err(MapError::DuplicateMarker(ch, r, c));
                        }
                        markers[k] = Some((r, c));
                    }
                }
            }
        }

        let mut cells = [(0, 0); 4];
        for (k, &m) in MARKS.iter().enumerate() {
            cells[k] = markers[k].ok_or(MapError::MissingMarker(m))?;
        }
        let map = MazeMap {
            walls,
            start: cells[0],
            easy: cells[1],
            medium: cells[2],
            hard: cells[3],
        };

        for (name, cell) in [('E', map.easy), ('M', map.medium), ('H', map.hard)] {
            if map.bfs_distance(map.start, cell).is_none() {
                return Err(MapError::UnreachableGoal { name, row: cell.0, col: cell.1 });
            }
        }
        Ok(map)
    }

    pub fn is_wall(&self, row: isize, col: isize) -> bool {
        // Anything outside the grid counts as wall.
        if row < 0 || col < 0 || row as usize >= GRID || col as usize >= GRID {
            return true;
        }
        self.walls[row as usize][col as usize]
    }

    /// Shortest path length in 4-connected moves, or `None` if unreachable.
    pub fn bfs_distance(&self, from: (usize, usize), to: (usize, usize)) -> Option<usize> {
        let mut dist = [[usize::MAX; GRID]; GRID];
        dist[from.0][from.1] = 0;
        let mut queue = VecDeque::from([from]);
        while let Some((r, c)) = queue.pop_front() {
            if (r, c) == to {
                return Some(dist[r][c]);
            }
            for (dr, dc) in [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)] {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                if self.is_wall(nr, nc) {
                    continue;
                }
                let (nr, nc) = (nr as usize, nc as usize);
                if dist[nr][nc] == usize::MAX {
                    dist[nr][nc] = dist[r][c] + 1;
                    queue.push_back((nr, nc));
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_grid_with_adjacent_goal() {
        let text = "\
SE........
..........
.........M
..........
..........
..........
..........
..........
..........
.........H";
        let map = MazeMap::parse(text).unwrap();
        assert_eq!(map.start, (0, 0));
        assert_eq!(map.easy, (0, 1));
        assert_eq!(map.bfs_distance(map.start, map.easy), Some(1));
    }

    #[test]
    fn walled_off_goal_is_an_error() {
        let text = "\
S.........
..........
....###...
....#E#..M
....###...
..........
..........
..........
..........
.........H";
        match MazeMap::parse(text) {
            Err(MapError::UnreachableGoal { name: 'E', row: 3, col: 5 }) => {}
            other => panic!("expected unreachable E, got {other:?}"),
        }
    }

    #[test]
    fn dimension_and_marker_errors() {
        assert!(matches!(
            MazeMap::parse("S.\n.E"),
            Err(MapError::WrongLineCount(2))
        ));
        let short = "S........\n..........\n.........M\n..........\n..........\n..........\n..........\n..........\n..........\n.......EH.";
        assert!(matches!(
            MazeMap::parse(short),
            Err(MapError::WrongLineLength { line: 0, len: 9 })
        ));
        let no_h = DEFAULT_MAP.replace('H', ".");
        assert!(matches!(MazeMap::parse(&no_h), Err(MapError::MissingMarker('H'))));
        let two_s = DEFAULT_MAP.replacen('M', "S", 1);
        assert!(matches!(
            MazeMap::parse(&two_s),
            Err(MapError::DuplicateMarker('S', _, _))
        ));
        let bad = DEFAULT_MAP.replacen('.', "x", 1);
        assert!(matches!(MazeMap::parse(&bad), Err(MapError::InvalidChar { .. })));
    }

    #[test]
    fn default_map_goal_ordering() {
        let map = MazeMap::parse(DEFAULT_MAP).unwrap();
        let easy = map.bfs_distance(map.start, map.easy).unwrap();
        let medium = map.bfs_distance(map.start, map.medium).unwrap();
        let hard = map.bfs_distance(map.start, map.hard).unwrap();
        assert!(easy < medium && medium < hard, "{easy} {medium} {hard}");
    }

    #[test]
    fn boundary_counts_as_wall() {
        let map = MazeMap::parse(DEFAULT_MAP).unwrap();
        assert!(map.is_wall(-1, 0));
        assert!(map.is_wall(0, 10));
        assert!(!map.is_wall(1, 1));
    }
}
