//! JSON file helpers. Canonical output sorts object keys and prints every
//! float with 17 significant digits in C `%.17g` style.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use decafbench_core::numfmt::format_serial;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::json(path, e))
}

/// Two-space indented JSON with a trailing newline.
pub fn to_pretty(value: &impl Serialize) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("value serializes");
    out.push(b'\n');
    out
}

struct Canonical {
    pretty: PrettyFormatter<'static>,
}

impl Formatter for Canonical {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_serial(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_object_value(writer)
    }
}

/// Canonical, byte-deterministic JSON with a trailing newline.
pub fn to_canonical(value: &impl Serialize) -> Vec<u8> {
    // `Value` objects are BTreeMaps, which yields sorted keys.
    let tree = serde_json::to_value(value).expect("value serializes");
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Canonical { pretty: PrettyFormatter::new() });
    tree.serialize(&mut ser).expect("in-memory write");
    out.push(b'\n');
    out
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn canonical_sorts_and_formats() {
        let v = json!({"b": 8.0 / 9.0, "a": [1, 0.5, 2.0], "c": {"z": 1e-12, "y": null}});
        let text = String::from_utf8(to_canonical(&v)).unwrap();
        let expected = "{\n  \"a\": [\n    1,\n    0.5,\n    2\n  ],\n  \"b\": 0.88888888888888884,\n  \"c\": {\n    \"y\": null,\n    \"z\": 9.9999999999999998e-13\n  }\n}\n";
        assert_eq!(text, expected);
    }

    #[test]
    fn canonical_floats_round_trip() {
        let values = [0.1, 1.0 / 3.0, 2.5e-300, 123456789.123, -7.0];
        let text = to_canonical(&values.to_vec());
        let back: Vec<f64> = serde_json::from_slice(&text).unwrap();
        assert_eq!(back, values);
    }
}
