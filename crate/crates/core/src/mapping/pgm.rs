//! Plain (P2) grayscale image output.

use std::fmt::Write as _;

use super::semantic::SemanticView;

/// Gray value drawn for trajectory overlays.
pub const TRAJECTORY_GRAY: u8 = 32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn from_view(view: &SemanticView) -> Self {
        let (width, height) = (view.tri.width(), view.tri.height());
        let pixels = (0..width * height).map(|i| view.get(view.tri.cell_at(i)).gray()).collect();
        Self { width, height, pixels }
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: i32, y: i32, value: u8) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.pixels[y as usize * self.width + x as usize] = value;
        }
    }

    /// P2 encoding, one image row per line, row 0 first.
    pub fn to_pgm(&self) -> String {
        let mut out = String::with_capacity(self.pixels.len() * 4 + 32);
        writeln!(out, "P2\n{} {}\n255", self.width, self.height).expect("write to string");
        for row in self.pixels.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}
