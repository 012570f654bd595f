//! Every iterator against an unrolled recurrence, on both interpreters.

mod common;

use common::check_hof_kind;
use scade2b::frontend::ast::HofKind;

const CASES: usize = 100;

macro_rules! oracle_tests {
    ($($name:ident => $kind:ident, $seed:literal;)*) => {$(
        #[test]
        fn $name() {
            if let Err(e) = check_hof_kind(HofKind::$kind, $seed, CASES) {
                panic!("{e}");
            }
        }
    )*};
}

oracle_tests! {
    map => Map, 1;
    mapi => Mapi, 2;
    mapw => Mapw, 3;
    mapwi => Mapwi, 4;
    fold => Fold, 5;
    foldi => Foldi, 6;
    foldw => Foldw, 7;
    foldwi => Foldwi, 8;
    mapfold => Mapfold, 9;
    mapfoldi => Mapfoldi, 10;
    mapfoldw => Mapfoldw, 11;
    mapfoldwi => Mapfoldwi, 12;
}
