#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use image::{Rgb, RgbImage};

pub const BIN: &str = env!("CARGO_BIN_EXE_decafbench");

pub fn pixel(x: u32, y: u32, salt: u32) -> Rgb<u8> {
    Rgb([(x * 7 + salt) as u8, (y * 13 + salt * 3) as u8, ((x ^ y) + salt * 5) as u8])
}

pub fn write_image(path: &Path, width: u32, height: u32, salt: u32) {
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    RgbImage::from_fn(width, height, |x, y| pixel(x, y, salt)).save(path).unwrap();
}

/// A VOT-style sequence directory with `frames` 64x48 PNG frames and a
/// ground-truth line per frame.
pub fn vot_sequence(root: &Path, name: &str, frames: u32) -> PathBuf {
    let dir = root.join(name);
    let mut gt = String::new();
    for i in 0..frames {
        write_image(&dir.join(format!("{:08}.png", i + 1)), 64, 48, i);
        let (x, y) = (10.0 + i as f64, 12.0);
        let (w, h) = (16.0, 12.0);
        gt.push_str(&format!("{x},{y},{},{y},{},{},{x},{}\n", x + w, x + w, y + h, y + h));
    }
    fs::write(dir.join("groundtruth.txt"), gt).unwrap();
    dir
}

pub fn uav_sequence(root: &Path, name: &str, frames: u32) {
    let data = root.join("data_seq").join("UAV123").join(name);
    let mut gt = String::new();
    for i in 0..frames {
        write_image(&data.join(format!("{:06}.jpg", i + 1)), 64, 48, i);
        if i == 1 {
            gt.push_str("NaN,NaN,NaN,NaN\n");
        } else {
            gt.push_str(&format!("{},20,18,14\n", 5 + i));
        }
    }
    let anno = root.join("anno").join("UAV123");
    fs::create_dir_all(&anno).unwrap();
    fs::write(anno.join(format!("{name}.txt")), gt).unwrap();
}

pub fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env("DECAFBENCH_LOG", "error").output().expect("binary runs")
}

pub fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}\n{}",
        String::from_utf8_lossy(&out.stderr),
        String::from_utf8_lossy(&out.stdout)
    );
    out
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
