use proptest::prelude::*;

use levopt::emit::{emit, parse_csv, Format, Record};
use levopt::spectra::{convolve_psd, lorentzian, SpectralKernel};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Two Lorentzians convolve to one whose width and center add.
    #[test]
    fn lorentzians_compose(
        wa in 1e-3f64..1e3,
        wb in 1e-3f64..1e3,
        ca in -1e4f64..1e4,
        cb in -1e4f64..1e4,
        at in -5.0f64..5.0,
    ) {
        let a = SpectralKernel::LorentzianPower { magnitude: 2.0, width: wa, center: ca };
        let b = SpectralKernel::LorentzianPower { magnitude: 0.5, width: wb, center: cb };
        let omega = ca + cb + at * (wa + wb);
        let got = convolve_psd(&a, &b, omega).unwrap();
        let want = lorentzian(omega - ca - cb, wa + wb);
        prop_assert!((got / want - 1.0).abs() < 1e-5, "{got} vs {want}");
        let swapped = convolve_psd(&b, &a, omega).unwrap();
        prop_assert_eq!(got, swapped);
    }

    /// Numbers survive a CSV round trip exactly.
    #[test]
    fn csv_round_trip(xs in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::ZERO, 1..20)) {
        let records: Vec<Record> = xs.iter().enumerate()
            .map(|(i, &x)| Record::new().int("index", i as i64).num("value_m", x))
            .collect();
        let (header, rows) = parse_csv(&emit(&records, Format::Csv).unwrap()).unwrap();
        prop_assert_eq!(header, vec!["index".to_string(), "value_m".to_string()]);
        for (row, x) in rows.iter().zip(&xs) {
            prop_assert_eq!(row[1].parse::<f64>().unwrap(), *x);
        }
    }
}
