use std::fs;

use decafbench::dcf::{read_embeddings, write_embeddings, EmbeddingReader};
use decafbench_core::embedding::{encode_header, EmbeddingFile, EmbeddingRecord, HeaderInfo, Metaclass};

fn file(dimension: u32, records: usize) -> EmbeddingFile {
    EmbeddingFile {
        network: "net".into(),
        dataset: "VOT2015".into(),
        dimension,
        sequences: vec!["a".into(), "b".into()],
        records: (0..records)
            .map(|i| EmbeddingRecord {
                sequence_index: (i % 2) as u32,
                frame_index: i as u32,
                metaclass: if i % 3 == 0 { Metaclass::Target } else { Metaclass::Background },
                patch_index: (i % 4) as u8,
                vector: (0..dimension).map(|k| k as f32 - i as f32 * 0.5).collect(),
            })
            .collect(),
    }
}

#[test]
fn size_is_header_plus_records() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.dcf");
    let f = file(4, 2);
    write_embeddings(&f, &path).unwrap();
    let header = encode_header(&HeaderInfo { network: f.network.clone(), dataset: f.dataset.clone(), sequences: f.sequences.clone() }, 4, 2).unwrap();
    assert_eq!(fs::metadata(&path).unwrap().len() as usize, header.len() + 2 * (12 + 16));
    assert_eq!(read_embeddings(&path).unwrap(), f);

    let mut reader = EmbeddingReader::open(&path).unwrap();
    assert_eq!(reader.dimension(), 4);
    assert_eq!(reader.record_count(), 2);
    assert_eq!(reader.header().sequences, ["a", "b"]);
    let streamed: Vec<_> = reader.by_ref().collect::<Result<_, _>>().unwrap();
    assert_eq!(streamed, f.records);
}

#[test]
fn non_finite_vectors_are_not_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nan.dcf");
    let mut f = file(3, 3);
    f.records[1].vector[2] = f32::NAN;
    let err = write_embeddings(&f, &path).unwrap_err();
    assert!(err.to_string().contains("record 1: component 2 is not finite"), "{err}");
    assert!(!path.exists());
}

#[test]
fn truncation_names_the_record() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.dcf");
    let f = file(8, 5);
    write_embeddings(&f, &path).unwrap();
    let bytes = fs::read(&path).unwrap();
    fs::write(&path, &bytes[..bytes.len() - 10]).unwrap();
    let err = read_embeddings(&path).unwrap_err();
    assert!(err.to_string().contains("truncated at record 4"), "{err}");

    fs::write(&path, b"DCF").unwrap();
    assert!(read_embeddings(&path).unwrap_err().to_string().contains("not an embedding interchange file"));
    fs::write(&path, &bytes[..20]).unwrap();
    assert!(read_embeddings(&path).unwrap_err().to_string().contains("truncated header"));
}

#[test]
fn streaming_reader_without_length_detects_extra_bytes() {
    let mut bytes = file(2, 3).encode().unwrap();
    bytes.extend_from_slice(&[0; 5]);
    let mut reader = EmbeddingReader::new(bytes.as_slice(), None).unwrap();
    for _ in 0..3 {
        assert!(reader.next_record().unwrap().is_some());
    }
    let err = reader.next_record().unwrap_err();
    assert!(err.to_string().contains("record count mismatch"), "{err}");
}
