mod common;

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2, Vector2};
use num_complex::Complex64;

use common::*;
use objrender::geometry::{Direction3, Vec3};
use objrender::renderers::{
    ambi_gains, ambi_mm_decode, diffuse_gains, pm_filters, render_block, vbap_gains, wfs_drive, DrivingFunction,
    RenderState, SpeakerDrive, SPEED_OF_SOUND,
};

fn xy(az: f64) -> (f64, f64) {
    let a = az.to_radians();
    (a.cos(), a.sin())
}

#[test]
fn vbap_orthogonal_pair_matches_linear_solve() {
    let pair = [Direction3::horizontal(0.0), Direction3::horizontal(90.0)];
    let g = vbap_gains(&Direction3::horizontal(30.0), &pair).unwrap();

    let (a0, b0) = xy(0.0);
    let (a1, b1) = xy(90.0);
    let (tx, ty) = xy(30.0);
    let raw = Matrix2::new(a0, a1, b0, b1).lu().solve(&Vector2::new(tx, ty)).unwrap();
    let oracle = raw / raw.norm();
    assert!((g.0[0] - oracle[0]).abs() < 1e-12 && (g.0[1] - oracle[1]).abs() < 1e-12);
    assert!((g.0[0] - 0.86603).abs() < 1e-5 && (g.0[1] - 0.5).abs() < 1e-5);
}

#[test]
fn vbap_symmetric_and_on_speaker_cases() {
    let pair = [Direction3::horizontal(45.0), Direction3::horizontal(-45.0)];
    let centre = vbap_gains(&Direction3::horizontal(0.0), &pair).unwrap();
    assert!(centre.0.iter().all(|g| (g - 0.5f64.sqrt()).abs() < 1e-12));
    let on = vbap_gains(&Direction3::horizontal(45.0), &pair).unwrap();
    assert!((on.0[0] - 1.0).abs() < 1e-12 && on.0[1].abs() < 1e-12);
}

#[test]
fn square_decoder_matches_normal_equations() {
    let az = [0.0, 90.0, 180.0, -90.0];
    let square: Vec<Direction3> = az.iter().map(|&a| Direction3::horizontal(a)).collect();
    let dec = ambi_mm_decode(&square, 1).unwrap();

    let y = DMatrix::from_fn(4, 3, |i, k| {
        let (c, s) = xy(az[i]);
        [1.0, c, s][k]
    });
    let oracle = &y * (y.transpose() * &y).try_inverse().unwrap();
    assert!((&dec - &oracle).abs().max() < 1e-12);
    for (i, &a) in az.iter().enumerate() {
        let (c, s) = xy(a);
        let row = [0.25, 0.5 * c, 0.5 * s];
        for k in 0..3 {
            assert!((dec[(i, k)] - row[k]).abs() < 1e-12);
        }
    }

    let g = ambi_gains(&dec, &Direction3::horizontal(0.0), 1);
    for (got, want) in g.0.iter().zip([0.75, 0.25, -0.25, 0.25]) {
        assert!((got - want).abs() < 1e-12, "{:?}", g.0);
    }
}

fn green_oracle(f: f64, r: f64) -> Complex64 {
    let k = 2.0 * PI * f / SPEED_OF_SOUND;
    Complex64::new((k * r).cos(), -(k * r).sin()) / (4.0 * PI * r)
}

#[test]
fn pressure_matching_two_speakers_one_point_matches_regularized_solve() {
    let speakers = [Vec3::new(2.0, 0.5, 0.0), Vec3::new(1.5, -1.0, 0.0)];
    let control = [Vec3::new(0.0, 0.0, 0.0)];
    let target = Vec3::new(3.0, 1.0, 0.0);
    let freqs = [100.0, 500.0, 1000.0, 4000.0];
    let beta = 1e-3;
    let sol = pm_filters(&speakers, &control, target, &freqs, beta, SPEED_OF_SOUND).unwrap();

    for (k, &f) in freqs.iter().enumerate() {
        let g = [green_oracle(f, speakers[0].norm()), green_oracle(f, speakers[1].norm())];
        let p = green_oracle(f, target.norm());
        // (GᴴG + βI) q = Gᴴ p for a 1×2 G, by Cramer's rule
        let a00 = Complex64::new(g[0].norm_sqr() + beta, 0.0);
        let a11 = Complex64::new(g[1].norm_sqr() + beta, 0.0);
        let a01 = g[0].conj() * g[1];
        let a10 = g[1].conj() * g[0];
        let rhs = [g[0].conj() * p, g[1].conj() * p];
        let det = a00 * a11 - a01 * a10;
        let q0 = (rhs[0] * a11 - a01 * rhs[1]) / det;
        let q1 = (a00 * rhs[1] - a10 * rhs[0]) / det;
        assert!((sol.q[k][0] - q0).norm() < 1e-6, "{f} Hz");
        assert!((sol.q[k][1] - q1).norm() < 1e-6, "{f} Hz");
    }
}

#[test]
fn wfs_two_speaker_gain_and_delay() {
    let speakers = [Direction3::with_distance(0.0, 0.0, 2.0), Direction3::with_distance(0.0, 0.0, 1.0)];
    let d = wfs_drive(&Direction3::with_distance(0.0, 0.0, 3.0), &speakers, SPEED_OF_SOUND).unwrap();
    assert!((d.speakers[0].gain / d.speakers[1].gain - 2.0).abs() < 1e-12);
    assert_eq!(d.speakers[0].delay_s, 0.0);
    assert!((d.speakers[1].delay_s * 1e3 - 2.915).abs() < 1e-3);
}

#[test]
fn wfs_equidistant_speakers_share_gain_and_zero_delay() {
    let arc: Vec<Direction3> = [-20.0, 0.0, 20.0].iter().map(|&a| Direction3::with_distance(a, 0.0, 2.0)).collect();
    let d = wfs_drive(&Direction3::with_distance(0.0, 0.0, 1e-9), &arc, SPEED_OF_SOUND);
    // a source at the centre is inside the arc
    assert!(d.is_err());
    let src = Vec3::new(0.0, 0.0, 5.0);
    let ring: Vec<Direction3> = (0..4)
        .map(|i| {
            let a = (90.0 * i as f64).to_radians();
            Direction3::from_position(Vec3::new(a.cos(), a.sin(), 0.0)).unwrap()
        })
        .collect();
    let d = wfs_drive(&Direction3::from_position(src).unwrap(), &ring, SPEED_OF_SOUND).unwrap();
    assert!(d.speakers.iter().all(|s| (s.gain - 0.5).abs() < 1e-12 && s.delay_s.abs() < 1e-15));
}

fn render_whole(x: &[f64], drive: &DrivingFunction, block: usize) -> Vec<Vec<f64>> {
    let mut state = RenderState::new(drive, FS, block);
    let mut out = vec![Vec::with_capacity(x.len()); drive.len()];
    for chunk in x.chunks(block) {
        let mut b = chunk.to_vec();
        b.resize(block, 0.0);
        for (o, y) in out.iter_mut().zip(render_block(&b, drive, &mut state).unwrap()) {
            o.extend(y);
        }
    }
    out
}

fn single(gain: f64, delay_s: f64) -> DrivingFunction {
    DrivingFunction {
        speakers: vec![SpeakerDrive {
            gain,
            delay_s,
            filter: None,
        }],
    }
}

#[test]
fn render_block_identity_gain_and_delay() {
    let x = white(8, 4096);
    assert_eq!(render_whole(&x, &single(1.0, 0.0), 1024)[0], x);

    let half = render_whole(&x, &single(0.5, 0.0), 1024);
    let rms = |v: &[f64]| (v.iter().map(|s| s * s).sum::<f64>() / v.len() as f64).sqrt();
    assert!((rms(&half[0]) / rms(&x) - 0.5).abs() < 1e-12);

    let mut impulse = vec![0.0; 1024];
    impulse[0] = 1.0;
    let y = &render_whole(&impulse, &single(1.0, 0.010), 1024)[0];
    let peak = y.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).unwrap();
    assert_eq!(peak.0, 480);
    assert!((peak.1 - 1.0).abs() < 1e-12);
}

#[test]
fn diffuse_render_of_white_noise_is_decorrelated() {
    let drive = diffuse_gains(4).unwrap();
    assert!(drive.speakers.iter().all(|s| (s.gain - 0.5).abs() < 1e-15));
    let x = white(9, 10 * FS as usize);
    let y = render_whole(&x, &drive, 1024);
    let energy: Vec<f64> = y.iter().map(|c| c.iter().map(|v| v * v).sum()).collect();
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in i + 1..4 {
            let dot: f64 = y[i].iter().zip(&y[j]).map(|(a, b)| a * b).sum();
            worst = worst.max((dot / (energy[i] * energy[j]).sqrt()).abs());
        }
    }
    assert!(worst < 0.2, "max correlation {worst}");
}
