fn main() {
    let params = ocrlab::synth::DegradationParams::default();
    let s = ocrlab::synth::render_line("letter error soon Quick BROWN fox 123!?", &params).unwrap();
    ocrlab::synth::dataset::write_pgm(std::path::Path::new("/tmp/check_clean.pgm"), &s.image).unwrap();
    let noisy = ocrlab::synth::DegradationParams {
        jitter_px: 1.0, baseline_amp: 2.0, baseline_period: 60.0,
        noise_std: 0.12, salt_pepper: 0.02, smooth_width: 2, seed: 5,
    };
    let s2 = ocrlab::synth::render_line("letter error soon rattle", &noisy).unwrap();
    ocrlab::synth::dataset::write_pgm(std::path::Path::new("/tmp/check_noisy.pgm"), &s2.image).unwrap();
    println!("ok {}x{}", s.image.shape()[0], s.image.shape()[1]);
}
