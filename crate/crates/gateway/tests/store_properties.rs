//! Store-level properties: losslessness and idempotent prefix replay.

use proptest::prelude::*;

use chairlab_core::telemetry::ImuSample;
use chairlab_gateway::store::SessionStore;

fn arb_batches() -> impl Strategy<Value = Vec<Vec<ImuSample>>> {
    // Batch sizes 0..8, values stressing float serialization.
    prop::collection::vec(prop::collection::vec(any::<u32>(), 0..8), 1..10).prop_map(|shape| {
        let mut t = 0.0f64;
        shape
            .into_iter()
            .map(|batch| {
                batch
                    .into_iter()
                    .map(|seed| {
                        t += 0.01 + (seed % 7) as f64 * 1e-5;
                        ImuSample {
                            t,
                            ax: f64::from_bits(0x3F80_0000_0000_0000 | u64::from(seed)),
                            ay: (seed as f64).sin() * 1e-3,
                            az: 1.0 + (seed as f64) * 1e-12,
                            gx: -(seed as f64) * 0.017,
                            gy: (seed % 100) as f64 / 3.0,
                            gz: 0.0,
                            mx: 30.0,
                            my: 5.0,
                            mz: -40.0,
                        }
                    })
                    .collect()
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn losslessness_and_idempotent_prefix_replay(batches in arb_batches()) {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path()).unwrap();
        for (seq, b) in batches.iter().enumerate() {
            store.post_batch("p01", "s0", seq as u64, b).unwrap();
        }
        // Replay an arbitrary prefix (plus a duplicate of each) on top.
        for (seq, b) in batches.iter().enumerate().take(batches.len() / 2 + 1) {
            store.post_batch("p01", "s0", seq as u64, b).unwrap();
            store.post_batch("p01", "s0", seq as u64, b).unwrap();
        }
        store.close_session("p01", "s0", 1).unwrap();
        let log = store.load_log("p01", "s0").unwrap();
        let expected: Vec<ImuSample> = batches.iter().flatten().copied().collect();
        prop_assert_eq!(log.samples.len(), expected.len());
        for (a, b) in log.samples.iter().zip(expected.iter()) {
            prop_assert_eq!(a.t.to_bits(), b.t.to_bits());
            prop_assert_eq!(a.ax.to_bits(), b.ax.to_bits());
            prop_assert_eq!(a.gy.to_bits(), b.gy.to_bits());
        }

        // On-disk state equals a fresh store fed the same batches once.
        let dir2 = tempfile::tempdir().unwrap();
        let store2 = SessionStore::open(dir2.path()).unwrap();
        for (seq, b) in batches.iter().enumerate() {
            store2.post_batch("p01", "s0", seq as u64, b).unwrap();
        }
        store2.close_session("p01", "s0", 1).unwrap();
        let bytes1 = std::fs::read(dir.path().join("p01/s0/data.jsonl")).unwrap();
        let bytes2 = std::fs::read(dir2.path().join("p01/s0/data.jsonl")).unwrap();
        prop_assert_eq!(bytes1, bytes2);
    }
}
