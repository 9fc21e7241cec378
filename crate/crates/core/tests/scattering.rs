use gkdv::profiles::{breather, soliton_profile, BreatherParams};
use gkdv::scattering::{resample, schrodinger_spectrum, zs_spectrum, Calibration, ScatteringOptions};
use gkdv::{Error, Exponent, Field, GridSpec};

fn ex(p: u32) -> Exponent {
    Exponent::new(p).unwrap()
}

fn solitons(p: u32, list: &[(f64, f64)], length: f64, n: usize) -> Field {
    let g = GridSpec::new(length, n, 1e-3).unwrap();
    Field::from_fn(g, ex(p), 0.0, |x| {
        list.iter()
            .map(|&(c, x0)| soliton_profile(ex(p), c, x - x0).unwrap())
            .sum()
    })
    .unwrap()
}

fn opts(points: usize) -> ScatteringOptions {
    ScatteringOptions {
        points: Some(points),
        ..Default::default()
    }
}

#[test]
fn zero_data_has_empty_spectrum() {
    let g = GridSpec::new(40.0, 128, 1e-3).unwrap();
    for p in [2, 3] {
        let u = Field::zeros(g, ex(p), 0.0).unwrap();
        let s = if p == 2 {
            schrodinger_spectrum(&u, &Default::default())
        } else {
            zs_spectrum(&u, &Default::default())
        };
        let s = s.unwrap();
        assert!(s.eigenvalues.is_empty() && s.predicted_solitons.is_empty() && s.predicted_breathers.is_empty());
        assert!(s.generic);
    }
}

#[test]
fn calibration_matches_closed_form_bound_states() {
    // q = √c·sech(√c x) in iξ-form has its bound state at ξ = i√c/2; −2κ²sech²(κx) has −κ².
    let zs = Calibration::zakharov_shabat();
    assert!((zs.anchor_raw - 0.5).abs() < 1e-8, "raw {}", zs.anchor_raw);
    assert!((zs.eigen_factor - 2f64.sqrt()).abs() < 1e-7);
    let sc = Calibration::schrodinger();
    assert!((sc.anchor_raw + 0.25).abs() < 1e-8, "raw {}", sc.anchor_raw);
    assert!((sc.eigen_factor - 4.0).abs() < 1e-7);
}

#[test]
fn zs_single_solitons() {
    for &c in &[1.0, 2.25] {
        let u = solitons(3, &[(c, 3.0)], 48.0, 256);
        let s = zs_spectrum(&u, &opts(256)).unwrap();
        assert_eq!(s.eigenvalues.len(), 1);
        assert!(s.eigenvalues[0].re.abs() < 1e-8);
        assert!(s.eigenvalues.iter().all(|z| z.im > 0.0));
        // Data i√(c/2) for the physical soliton of speed c.
        assert!((s.eigenvalues[0].im - (0.5 * c).sqrt()).abs() < 1e-6);
        assert!((s.predicted_solitons[0].c - c).abs() < 1e-3);
        assert!(s.refinement_shift.unwrap() < 1e-6);
    }
}

#[test]
fn zs_spectrum_ignores_sign_and_translation() {
    let u = solitons(3, &[(1.0, -6.0), (2.0, 8.0)], 64.0, 256);
    let a = zs_spectrum(&u, &opts(256)).unwrap();
    let b = zs_spectrum(&u.scale(-1.0).unwrap(), &opts(256)).unwrap();
    let c = zs_spectrum(&u.shift_cells(17), &opts(256)).unwrap();
    assert_eq!(a.predicted_solitons.len(), 2);
    for other in [&b, &c] {
        assert_eq!(other.eigenvalues.len(), a.eigenvalues.len());
        for (x, y) in a.eigenvalues.iter().zip(&other.eigenvalues) {
            assert!((x - y).norm() < 1e-8);
        }
    }
    assert!((a.predicted_solitons[0].c - 1.0).abs() < 1e-2);
    assert!((a.predicted_solitons[1].c - 2.0).abs() < 1e-2);
}

#[test]
fn zs_breather_is_one_complex_pair() {
    let b = BreatherParams::new(0.6, 1.0, 0.0, 0.0).unwrap();
    let g = GridSpec::new(48.0, 256, 1e-3).unwrap();
    let u = Field::from_fn(g, ex(3), 0.0, |x| breather(&b, 0.0, x).unwrap()).unwrap();
    let s = zs_spectrum(&u, &opts(256)).unwrap();
    assert_eq!(s.eigenvalues.len(), 2, "{:?}", s.eigenvalues);
    assert!((s.eigenvalues[0].re + s.eigenvalues[1].re).abs() < 1e-8);
    assert!(s.eigenvalues.iter().all(|z| z.re.abs() > 0.1 && z.im > 0.0));
    assert!(s.predicted_solitons.is_empty());
    assert_eq!(s.predicted_breathers.len(), 1);
    let got = s.predicted_breathers[0];
    assert!(
        (got.alpha - 0.6).abs() < 1e-6 && (got.beta - 1.0).abs() < 1e-6,
        "{got:?}"
    );
    assert!(s.generic, "{}", s.reason);
}

#[test]
fn schrodinger_speeds() {
    let u = solitons(2, &[(1.0, 0.0)], 48.0, 256);
    let s = schrodinger_spectrum(&u, &opts(256)).unwrap();
    assert_eq!(s.predicted_solitons.len(), 1);
    assert!((s.predicted_solitons[0].c - 1.0).abs() < 1e-3);
    // Decoupled wells: the spectrum of the sum is the union of the single-well spectra.
    let u = solitons(2, &[(1.0, -15.0), (4.0, 15.0)], 96.0, 512);
    let s = schrodinger_spectrum(&u, &opts(512)).unwrap();
    let c: Vec<f64> = s.predicted_solitons.iter().map(|p| p.c).collect();
    assert_eq!(c.len(), 2, "{c:?}");
    assert!((c[0] - 1.0).abs() < 1e-2 && (c[1] - 4.0).abs() < 1e-2, "{c:?}");
    assert!(s.generic);
}

#[test]
fn schrodinger_counts_separated_solitons() {
    let u = solitons(2, &[(0.5, -25.0), (1.5, 0.0), (3.0, 25.0)], 128.0, 512);
    let s = schrodinger_spectrum(&u, &opts(512)).unwrap();
    assert_eq!(s.predicted_solitons.len(), 3);
}

#[test]
fn refuses_bad_inputs() {
    let u = solitons(2, &[(1.0, 0.0)], 20.0, 128);
    assert!(matches!(
        schrodinger_spectrum(&u, &Default::default()),
        Err(Error::Decay(_))
    ));
    let u = solitons(3, &[(1.0, 0.0)], 48.0, 2048);
    assert!(matches!(
        zs_spectrum(&u, &Default::default()),
        Err(Error::InvalidParameter(_))
    ));
}

#[test]
fn resampling_keeps_the_spectrum() {
    let fine = solitons(3, &[(1.0, 0.0)], 48.0, 512);
    let g = GridSpec::new(48.0, 256, 1e-3).unwrap();
    let coarse = Field::new(g, ex(3), 0.0, resample(fine.values(), 256)).unwrap();
    let a = zs_spectrum(&coarse, &opts(256)).unwrap();
    assert!((a.predicted_solitons[0].c - 1.0).abs() < 1e-6);
}
