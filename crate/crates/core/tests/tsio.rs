use std::fs;

use nalgebra::DMatrix;
use spectral_cig::spectral::MultiAttributeSeries;
use spectral_cig::tsio::{load_series, preprocess, write_series, Layout, LoadOptions, MissingPolicy, PreprocessOptions};
use spectral_cig::Error;

#[test]
fn write_load_round_trip_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let data = DMatrix::from_fn(20, 6, |t, c| (t as f64 * 0.37 + c as f64).sin() * 1e3 + 1e-7 * c as f64);
    let series = MultiAttributeSeries::new(data.clone(), 3, 2).unwrap();
    write_series(&series, fs::File::create(&path).unwrap()).unwrap();
    let back = load_series(&path, 3, 2, &LoadOptions::default()).unwrap();
    assert_eq!(back.data(), &data);
}

#[test]
fn tab_delimited_attribute_major_with_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.tsv");
    // columns a1n1, a1n2, a2n1, a2n2
    fs::write(&path, "a1n1\ta1n2\ta2n1\ta2n2\n1\t2\t3\t4\n5\tNA\t7\t8\n9\t10\t\t12\n").unwrap();
    let opts = LoadOptions { layout: Layout::AttributeMajor, delimiter: b'\t', missing: MissingPolicy::ForwardFill };
    let s = load_series(&path, 2, 2, &opts).unwrap();
    // channel order n1a1, n1a2, n2a1, n2a2
    assert_eq!(s.data().row(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 3.0, 2.0, 4.0]);
    assert_eq!(s.data().row(1).iter().copied().collect::<Vec<_>>(), vec![5.0, 7.0, 2.0, 8.0]);
    assert_eq!(s.data().row(2).iter().copied().collect::<Vec<_>>(), vec![9.0, 7.0, 10.0, 12.0]);

    let strict = LoadOptions { missing: MissingPolicy::Reject, ..opts };
    // channels are scanned in node-major order, so node 1 attribute 2 is hit first
    match load_series(&path, 2, 2, &strict) {
        Err(Error::MissingValue { row, column }) => assert_eq!((row, column.as_str()), (3, "a2n1")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn missing_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_series(dir.path().join("nope.csv"), 1, 1, &LoadOptions::default()), Err(Error::Io(_))));
}

#[test]
fn preprocessed_file_has_unit_scale() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("prices.csv");
    let mut text = String::from("n1a1,n1a2\n");
    for t in 0..50 {
        let t = t as f64;
        text.push_str(&format!("{},{}\n", 100.0 * (0.01 * t).exp() * (1.0 + 0.05 * (t * 1.3).sin()), 5.0 + (t * 0.7).cos()));
    }
    fs::write(&path, text).unwrap();
    let s = load_series(&path, 1, 2, &LoadOptions::default()).unwrap();
    let out = preprocess(&s, &PreprocessOptions::default()).unwrap();
    assert_eq!(out.len(), 49);
    for c in 0..2 {
        let ms = out.data().column(c).iter().map(|v| v * v).sum::<f64>() / 49.0;
        assert!((ms - 1.0).abs() < 1e-12);
    }
}
