use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use medkit_core::io::{self, PixelType};
use medkit_core::processing::{blur, crop, gradient, resample, Blur, GradientOptions, GridSpec, ResampleOptions};
use medkit_core::transforms::transform_rigid;
use medkit_core::Image;
use serde_json::Value;

fn medkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_medkit")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = medkit(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn ramp(size: &[usize], origin: &[f64], spacing: &[f64]) -> Image {
    let mut im = Image::new(size, origin, spacing).unwrap();
    let len = im.len();
    im.set_data((0..len).map(|i| ((i * 29) % 53) as f64 * 0.5 - 4.0).collect())
        .unwrap();
    im
}

fn tmp() -> (tempfile::TempDir, impl Fn(&str) -> PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    (dir, move |name: &str| root.join(name))
}

#[test]
fn info_reports_geometry() {
    let (_dir, path) = tmp();
    let im = ramp(&[7, 5, 3], &[1.0, -2.0, 0.5], &[0.5, 1.0, 2.5]);
    io::write_mhd(path("a.mhd"), &im, None).unwrap();
    let v: Value = serde_json::from_str(&ok(&["info", s(&path("a.mhd"))])).unwrap();
    assert_eq!(v["size"], serde_json::json!([7, 5, 3]));
    assert_eq!(v["spacing"], serde_json::json!([0.5, 1.0, 2.5]));
    assert_eq!(v["origin"], serde_json::json!([1.0, -2.0, 0.5]));
    assert_eq!(v["orientation"].as_array().unwrap().len(), 9);
    let (lo, hi) = im.value_range();
    assert_eq!(v["value_range"], serde_json::json!([lo, hi]));
}

#[test]
fn convert_to_uint8_casts() {
    let (_dir, path) = tmp();
    let mut im = Image::new(&[4, 1], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
    im.set_data(vec![-3.0, 2.5, 254.49, 300.0]).unwrap();
    io::write_gipl(path("in.gipl"), &im).unwrap();
    ok(&[
        "convert",
        s(&path("in.gipl")),
        s(&path("out.mhd")),
        "--element-type",
        "uint8",
    ]);
    let header = std::fs::read_to_string(path("out.mhd")).unwrap();
    assert!(header.contains("ElementType = MET_UCHAR"));
    assert_eq!(std::fs::metadata(path("out.raw")).unwrap().len(), 4);
    let back = io::read_mhd(path("out.mhd")).unwrap();
    assert_eq!(back.data(), &[0.0, 3.0, 254.0, 255.0]);
    let expected: Vec<f64> = im.data().iter().map(|&v| PixelType::U8.cast(v)).collect();
    assert_eq!(back.data(), expected.as_slice());
}

#[test]
fn filters_match_the_library() {
    let (_dir, path) = tmp();
    let im = ramp(&[12, 10], &[0.0, 0.0], &[1.0, 1.0]);
    io::write_mhd(path("in.mhd"), &im, None).unwrap();
    let input = path("in.mhd");

    ok(&["resample", s(&input), s(&path("r.mhd")), "--spacing", "0.5,2"]);
    let want = resample(&im, &GridSpec::Spacing(vec![0.5, 2.0]), &ResampleOptions::default()).unwrap();
    assert_eq!(io::read_mhd(path("r.mhd")).unwrap().data(), want.data());

    ok(&["crop", s(&input), s(&path("c.mhd")), "--bounds=-1,4.5,2,6"]);
    let want = crop(&im, &[-1.0, 4.5, 2.0, 6.0]).unwrap();
    let got = io::read_mhd(path("c.mhd")).unwrap();
    assert_eq!(got.size(), want.size());
    assert_eq!(got.data(), want.data());

    ok(&[
        "blur",
        s(&input),
        s(&path("b.mhd")),
        "--neigh",
        "2,2",
        "--sigma",
        "1,1.5",
    ]);
    let want = blur(
        &im,
        &Blur {
            neigh: vec![2, 2],
            sigma: vec![1.0, 1.5],
        },
    )
    .unwrap();
    assert_eq!(io::read_mhd(path("b.mhd")).unwrap().data(), want.data());

    ok(&["gradient", s(&input), s(&path("gx.mhd")), s(&path("gy.mhd"))]);
    let want = gradient(&im, &GradientOptions::default()).unwrap();
    assert_eq!(io::read_mhd(path("gy.mhd")).unwrap().data(), want[1].data());
    assert_eq!(
        medkit(&["gradient", s(&input), s(&path("gx.mhd"))]).status.code(),
        Some(1)
    );
}

#[test]
fn reslice_axial_plane() {
    let (_dir, path) = tmp();
    let im = ramp(&[6, 5, 5], &[0.0; 3], &[1.0; 3]);
    io::write_mhd(path("v.mhd"), &im, None).unwrap();
    ok(&["reslice", s(&path("v.mhd")), s(&path("s.mhd")), "--flat"]);
    let slice = io::read_mhd(path("s.mhd")).unwrap();
    assert_eq!(slice.size(), &[6, 5]);
    for j in 1..=5 {
        for i in 1..=6 {
            assert_eq!(slice.get_pixel(&[i, j]).unwrap(), im.get_pixel(&[i, j, 3]).unwrap());
        }
    }
    ok(&[
        "reslice",
        s(&path("v.mhd")),
        s(&path("o.mhd")),
        "--normal",
        "0.2,-0.3,1",
        "--thickness",
        "3",
    ]);
    assert_eq!(io::read_mhd(path("o.mhd")).unwrap().size()[2], 1);
}

fn phantom(n: usize) -> Image {
    let mut im = Image::new(&[n, n], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
    let c = (n as f64 - 1.0) / 2.0;
    let sc = n as f64 / 128.0;
    let blobs = [
        (-20.0, -15.0, 14.0, 8.0, 1.0),
        (25.0, -10.0, 8.0, 16.0, 0.8),
        (5.0, 28.0, 18.0, 6.0, 0.6),
        (-25.0, 25.0, 6.0, 6.0, 0.9),
        (10.0, 0.0, 5.0, 10.0, 0.7),
    ];
    let data = im
        .all_positions()
        .iter()
        .map(|p| {
            let (x, y) = ((p[0] - c) / sc, (p[1] - c) / sc);
            let r = (x * x + y * y).sqrt();
            blobs
                .iter()
                .map(|(bx, by, sx, sy, a)| {
                    a * (-((x - bx).powi(2) / (2.0 * sx * sx) + (y - by).powi(2) / (2.0 * sy * sy))).exp()
                })
                .sum::<f64>()
                + 0.5 * (-(r - 40.0).powi(2) / 18.0).exp()
        })
        .collect();
    im.set_data(data).unwrap();
    im
}

#[test]
fn register_rigid_recovers_rotation() {
    let (_dir, path) = tmp();
    let fixed = phantom(128);
    let moving = transform_rigid(&fixed, &[0.0, 0.0, 15f64.to_radians()], &fixed).unwrap();
    io::write_mhd(path("f.mhd"), &fixed, None).unwrap();
    io::write_mhd(path("m.mhd"), &moving, None).unwrap();
    let (f, m, out, w) = (path("f.mhd"), path("m.mhd"), path("matrix.txt"), path("w.mhd"));
    let args = [
        "register-rigid",
        "--fixed",
        s(&f),
        "--moving",
        s(&m),
        "--metric",
        "ncc",
        "--out",
        s(&out),
        "--warped",
        s(&w),
    ];
    let summary: Value = serde_json::from_str(&ok(&args)).unwrap();
    let m = io::read_itk_matrix(path("matrix.txt")).unwrap();
    let angle = m[1][0].atan2(m[0][0]).to_degrees();
    assert!(((angle + 15.0) / 15.0).abs() <= 0.01, "angle {angle}");
    assert_eq!(m[2], [0.0, 0.0, 1.0, 0.0]);
    assert!(summary["cost_final"].as_f64().unwrap() < summary["cost_initial"].as_f64().unwrap());
    assert_eq!(io::read_mhd(path("w.mhd")).unwrap().size(), &[128, 128]);

    let first = std::fs::read(path("matrix.txt")).unwrap();
    ok(&args);
    assert_eq!(std::fs::read(path("matrix.txt")).unwrap(), first);
}

#[test]
fn register_ffd_lowers_the_cost() {
    let (_dir, path) = tmp();
    let fixed = phantom(48);
    let moving = transform_rigid(&fixed, &[1.0, -0.5, 0.05], &fixed).unwrap();
    io::write_mhd(path("f.mhd"), &fixed, None).unwrap();
    io::write_mhd(path("m.mhd"), &moving, None).unwrap();
    let out = ok(&[
        "register-ffd",
        "--fixed",
        s(&path("f.mhd")),
        "--moving",
        s(&path("m.mhd")),
        "--metric",
        "ssd",
        "--grid-spacing",
        "12,12",
        "--degree",
        "2",
        "--max-iter",
        "40",
        "--out",
        s(&path("p.json")),
    ]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["cost_final"].as_f64().unwrap() < v["cost_initial"].as_f64().unwrap());
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(path("p.json")).unwrap()).unwrap();
    assert_eq!(saved, v);
}

#[test]
fn mesh_sources_and_conversion() {
    let (_dir, path) = tmp();
    ok(&[
        "mesh-source",
        "box",
        s(&path("box.stl")),
        "--center=1,-2,0",
        "--dims",
        "2,3,4",
    ]);
    let v: Value = serde_json::from_str(&ok(&["info", s(&path("box.stl"))])).unwrap();
    assert_eq!(v["points"], 8);
    assert_eq!(v["triangles"], 12);
    ok(&[
        "mesh-source",
        "cylinder",
        s(&path("cyl.vtk")),
        "--resolution",
        "12",
        "--radius",
        "2",
    ]);
    assert_eq!(io::read_mesh(path("cyl.vtk")).unwrap().triangles().len(), 48);
    ok(&["convert", s(&path("cyl.vtk")), s(&path("cyl.stl"))]);
    assert_eq!(io::read_mesh(path("cyl.stl")).unwrap().triangles().len(), 48);
    ok(&["mesh-source", "sphere", s(&path("s.vtk")), "--radius", "3"]);
    assert!(io::read_mesh(path("s.vtk")).unwrap().is_closed_manifold());
}

#[test]
fn exit_codes() {
    let out = medkit(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let out = medkit(&["info", "x.mhd", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));

    let out = medkit(&["info", "/nonexistent/x.mhd"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.starts_with("medkit: error:"));

    let out = medkit(&["info", "scan.xyz"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(medkit(&["--help"]).status.success());
}
