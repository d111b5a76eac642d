mod common;

use common::worst_relative_error;
use dncfr::neural::{Architecture, CellKind};

#[test]
fn recurrent_cells_with_attention_match_finite_differences() {
    for (i, cell) in [CellKind::Rnn, CellKind::Gru, CellKind::Lstm].into_iter().enumerate() {
        let err = worst_relative_error(Architecture::Recurrent { cell, attention: true }, i % 2 == 0, 100, 10 + i as u64);
        assert!(err < 1e-4, "{:?}: {}", cell, err);
    }
}

#[test]
fn plain_readout_and_dense_baseline_match_finite_differences() {
    let lstm = Architecture::Recurrent { cell: CellKind::Lstm, attention: false };
    assert!(worst_relative_error(lstm, true, 30, 1) < 1e-4);
    let gru = Architecture::Recurrent { cell: CellKind::Gru, attention: false };
    assert!(worst_relative_error(gru, false, 30, 2) < 1e-4);
    assert!(worst_relative_error(Architecture::Fc { max_len: 6 }, true, 30, 3) < 1e-4);
}
