use xampling_mimo::*;

fn small<T: Real>() -> (RadarParams<T>, ArrayConfig<T>, CognitiveSpectrum<T>) {
    let p = RadarParams::new(4, 4, T::lit(1e-6), 8, T::lit(16e6), T::lit(10e9)).unwrap();
    let array = build_array(&p, ArrayMode::Mode3, 2).unwrap();
    let bands = vec![Band::new(T::lit(1e6), T::lit(5e6)), Band::new(T::lit(9e6), T::lit(12e6))];
    let spec = CognitiveSpectrum::build(p.bandwidth, bands, p.pri).unwrap();
    (p, array, spec)
}

fn support<T: Real>(seed: u64) -> (Vec<GridIndex>, Vec<GridIndex>) {
    let (p, array, spec) = small::<T>();
    let plan = TxPlan::fdm(&p, &array);
    let dict = build_dictionaries(&p, &array, &plan, spec.kappa()).unwrap();
    let scene = random_scene(&SceneSpec::new(2, T::zero()), &dict.grid, seed).unwrap();
    let y = synthesize(&scene, &array, &plan, &spec, &p).unwrap();
    let res = recover_tensor(&y, &dict, &RecoveryOptions::targets(2)).unwrap();
    let mut got = res.support();
    let mut want = scene.grid.unwrap();
    got.sort_unstable();
    want.sort_unstable();
    (got, want)
}

#[test]
fn single_precision_recovers_the_same_support() {
    for seed in 0..5 {
        let (got32, want) = support::<f32>(seed);
        let (got64, _) = support::<f64>(seed);
        assert_eq!(got32, want, "seed {seed}");
        assert_eq!(got64, want, "seed {seed}");
    }
}

#[test]
fn aliases_name_the_generic_types() {
    let p: RadarParams32 = RadarParams::desk();
    let g: Grid32 = Grid::reference(&p);
    assert_eq!(g.range_bins, RadarParams64::desk().range_bins());
}

#[test]
fn tensor_file_round_trip() {
    let (p, array, spec) = small::<f64>();
    let plan = TxPlan::fdm(&p, &array);
    let grid = Grid::new(&p, &array);
    let scene = random_scene(&SceneSpec::new(3, 0.0), &grid, 4).unwrap();
    let y: CoefficientTensor64 = add_noise(&synthesize(&scene, &array, &plan, &spec, &p).unwrap(), &NoiseSpec::new(5.0, 1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("y.xmct");
    y.save(&path).unwrap();
    assert_eq!(CoefficientTensor::load(&path).unwrap(), y);
}
