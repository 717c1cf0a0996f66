use sf2d_core::*;
use std::f64::consts::PI;

fn main() {
    let axis = PI / 6.0;
    let field = generate(&SynthSpec {
        width: 400, height: 400, pixel_size_m: 50.0, seed: 0, offset: 0.0,
        components: vec![Component::Swell {
            wavelength_px: 40.0, orientation_rad: axis + PI / 2.0, amplitude: 1.0, phase_rad: 0.0,
        }],
    }).unwrap();
    let transformed = Field2D::new(
        field.width(), field.height(), field.pixel_size(),
        field.values().iter().map(|v| 3.0 * v + 7.0).collect(),
        field.mask().to_vec(),
    ).unwrap();
    let spec = LagGridSpec::new(60, 1).unwrap();
    let ma = compute_statmaps(&field, &spec, 1000, Engine::Fft).unwrap();
    let mb = compute_statmaps(&transformed, &spec, 1000, Engine::Fft).unwrap();
    let mut worst = (0.0f64, 0isize, 0isize, StatKind::Skew, 0.0, 0.0);
    for j in -60isize..=60 {
        for i in -60isize..=60 {
            for kind in [StatKind::Skew, StatKind::Flat] {
                let a = ma.stat(kind).value_at(i, j);
                let b = mb.stat(kind).value_at(i, j);
                if !a.is_nan() && !b.is_nan() {
                    let d = (a - b).abs();
                    if d > worst.0 { worst = (d, i, j, kind, a, b); }
                }
            }
        }
    }
    println!("worst {:?}", worst);
    let (_, i, j, _, _, _) = worst;
    println!("m2 context: s2_a={:e} s2_b={:e} count={}",
        ma.s2().value_at(i, j), mb.s2().value_at(i, j), ma.count_at(i, j));
    println!("skew a={:e} b={:e}", ma.skew().value_at(i,j), mb.skew().value_at(i,j));
    println!("flat a={:e} b={:e}", ma.flat().value_at(i,j), mb.flat().value_at(i,j));
    // compare with direct engine at that lag
    let da = compute_statmaps(&field, &spec, 1000, Engine::Direct).unwrap();
    let db = compute_statmaps(&transformed, &spec, 1000, Engine::Direct).unwrap();
    println!("direct skew a={:e} b={:e}", da.skew().value_at(i,j), db.skew().value_at(i,j));
    println!("direct flat a={:e} b={:e}", da.flat().value_at(i,j), db.flat().value_at(i,j));
}
