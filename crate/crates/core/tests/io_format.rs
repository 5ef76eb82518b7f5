use fkwave::io::{fmt, to_json_string};
use proptest::prelude::*;

proptest! {
    #[test]
    fn csv_floats_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        let s = fmt(x);
        prop_assert_eq!(s.parse::<f64>().unwrap(), x);
        // 17 significant digits: d.dddddddddddddddde±x
        let mantissa = s.trim_start_matches('-').split('e').next().unwrap().replace('.', "");
        prop_assert_eq!(mantissa.len(), 17);
    }

    #[test]
    fn json_floats_round_trip(x in proptest::num::f64::NORMAL) {
        let s = to_json_string(&vec![x]).unwrap();
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back[0], x);
    }
}
