use rank_disparity::inference::survey_totals;
use rank_disparity::io::{
    load_fixture, parse_grouped_csv, parse_microdata_csv, synthesize_microdata, write_grouped_csv,
    write_microdata_csv, DesignSpec, FIXTURES,
};

#[test]
fn every_fixture_round_trips() {
    for f in FIXTURES {
        assert!(f.checksum_matches(), "{}", f.name);
        let t = load_fixture(f.name).unwrap();
        let mut buf = Vec::new();
        write_grouped_csv(&t, &mut buf).unwrap();
        let back = parse_grouped_csv(buf.as_slice()).unwrap();
        assert_eq!(back.dist.units(), t.dist.units());
        for (a, b) in t.dist.groups().iter().zip(back.dist.groups()) {
            assert!((a.share - b.share).abs() <= 1e-10 * a.share, "{}", f.name);
            assert!((a.mean_outcome - b.mean_outcome).abs() <= 1e-10 * a.mean_outcome, "{}", f.name);
        }
        assert_eq!(t.std_errors, back.std_errors);
    }
}

#[test]
fn synthetic_nhanes_prevalences() {
    let t = load_fixture("nhanes-2009-2010").unwrap();
    let data = synthesize_microdata(&t.dist, &DesignSpec::default(), 8).unwrap();
    let tot = survey_totals(&data).unwrap();
    for (j, want) in [21.6, 17.4, 15.7, 14.2, 11.5].iter().enumerate() {
        let got = 100.0 * tot.u1[j] / tot.u0[j];
        assert!((got - want).abs() <= 0.5, "group {j}: {got}");
    }
}

#[test]
fn synthetic_file_is_seed_deterministic() {
    let t = load_fixture("nhanes-2005-2008").unwrap();
    let render = |seed| {
        let mut buf = Vec::new();
        write_microdata_csv(&synthesize_microdata(&t.dist, &DesignSpec::default(), seed).unwrap(), &mut buf).unwrap();
        buf
    };
    assert_eq!(render(4), render(4));
    assert_ne!(render(4), render(5));
    let back = parse_microdata_csv(render(4).as_slice()).unwrap();
    let direct = synthesize_microdata(&t.dist, &DesignSpec::default(), 4).unwrap();
    assert_eq!(back.records(), direct.records());
    assert_eq!(back.group_labels(), direct.group_labels());
}
