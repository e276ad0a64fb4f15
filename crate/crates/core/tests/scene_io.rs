use std::io::Write;

use quantrace::cli::{parse_configs, run_matrix, RunOptions, SceneSource};
use quantrace::isect::Sidedness;
use quantrace::scene::{image_diff, load_obj, parse_obj, Image, Procedural, NO_HIT};
use quantrace::traversal::RayFormat;

const CUBE: &str = "# unit cube
o cube
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
vn 0 0 1
f 1 4 3 2
f 5 6 7 8
f 1 2 6 5
f 2 3 7 6
f 3 4 8 7
f 4 1 5 8
";

#[test]
fn obj_face_and_vertex_counts() {
    let m = parse_obj(&mut CUBE.as_bytes()).unwrap();
    let v_lines = CUBE.lines().filter(|l| l.starts_with("v ")).count();
    let f_lines = CUBE.lines().filter(|l| l.starts_with("f ")).count();
    assert_eq!(m.positions.len(), v_lines);
    assert_eq!(m.len(), 2 * f_lines);
    assert!(m.non_manifold_edges().is_empty());
    let b = m.bounds();
    assert_eq!((b.lo.to_array(), b.hi.to_array()), ([0.0; 3], [1.0; 3]));
}

#[test]
fn procedural_round_trip_through_obj() {
    let mesh = Procedural::Sphere(2).mesh();
    let mut text = String::new();
    for p in &mesh.positions {
        text += &format!("v {} {} {}\n", p.x, p.y, p.z);
    }
    for t in &mesh.indices {
        text += &format!("f {} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    let back = parse_obj(&mut text.as_bytes()).unwrap();
    assert_eq!(back.len(), mesh.len());
    assert!(back.triangles() == mesh.triangles(), "geometry changed");
}

#[test]
fn obj_file_through_the_matrix_runner() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cube.obj");
    std::fs::File::create(&path).unwrap().write_all(CUBE.as_bytes()).unwrap();
    assert_eq!(load_obj(&path).unwrap().len(), 12);
    let scene: SceneSource = path.to_str().unwrap().parse().unwrap();
    assert!(matches!(scene, SceneSource::Obj(_)));
    let opts = RunOptions {
        scene,
        resolution: (24, 24),
        bounces: 1,
        seed: 1,
        format: RayFormat::default(),
        side: Sidedness::TwoSided,
        out: dir.path().join("out"),
        reference: None,
    };
    let out = run_matrix(&parse_configs(&["BVH2-RS-C", "BVH2-SR-U"]).unwrap(), &opts).unwrap();
    assert!(out.ok());
    // the framing camera sees the whole cube and some sky
    let img = &out.runs[0].render.image;
    assert!(img.hit_ids.contains(&NO_HIT) && img.hit_ids.iter().any(|&h| h != NO_HIT));
    let ppm = std::fs::read(dir.path().join("out/BVH2-RS-C.ppm")).unwrap();
    assert!(ppm.starts_with(b"P6\n24 24\n255\n"));
    assert_eq!(ppm.len(), 13 + 24 * 24 * 3);
    assert!(!dir.path().join("out/diff.csv").exists());
}

#[test]
fn missing_obj_is_reported() {
    let scene: SceneSource = "/nonexistent/x.obj".parse().unwrap();
    assert!(scene.load().is_err());
}

#[test]
fn diff_of_opposites() {
    let black = Image::new(8, 8);
    let mut white = black.clone();
    white.rgb.fill([255; 3]);
    white.hit_ids.fill(3);
    let d = image_diff(&black, &white).unwrap();
    assert_eq!((d.hit_mismatch_fraction, d.mean_abs_color_diff), (1.0, 1.0));
    assert_eq!(image_diff(&black, &black).unwrap().hit_mismatches, 0);
}
