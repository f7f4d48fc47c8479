use fedus_core::model::{train, ArchConfig, TrainConfig};
use fedus_core::preprocess::BeatPair;
use std::time::Instant;

fn main() {
    for &nf in &[8usize, 12, 16] {
        let arch = ArchConfig { n_filters: nf, ..Default::default() }.with_window(160);
        let pairs: Vec<BeatPair> = (0..256)
            .map(|k| BeatPair {
                subject_id: format!("s{}", k % 4),
                peak_time: k as f64,
                fecg_in: (0..160).map(|i| ((i + k) as f32 * 0.1).sin()).collect(),
                dus_out: (0..1280).map(|i| ((i + k) as f32 * 0.01).cos()).collect(),
            })
            .collect();
        let tc = TrainConfig { max_epochs: 2, patience: 1, batch_size: 32, ..Default::default() };
        let t0 = Instant::now();
        let (_, hist) = train(&pairs, &arch, &tc).unwrap();
        let dt = t0.elapsed().as_secs_f64();
        let n_ex = 230 * hist.len(); // ~230 train pairs per epoch
        println!("filters={nf}: {:.2} s for {} epochs ({:.1} ms/example fwd+bwd)", dt, hist.len(), 1000.0 * dt / n_ex as f64);
    }
}
