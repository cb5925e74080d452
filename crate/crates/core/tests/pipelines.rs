use std::sync::Arc;

use socratic_core::caption::{CaptionConfig, EgocentricCaptioner};
use socratic_core::foundation::http::{HttpModel, HttpSettings, StubServer};
use socratic_core::foundation::mock::{bundled_adapters, HashEmbedder, MockAlm, MockLm, MockVlm, SyntheticWorld};
use socratic_core::foundation::{
    AdapterSet, AudioLanguageModel, CompletionParams, LanguageModel, MediaRef, TextEmbedder, VisionLanguageModel,
};
use socratic_core::world_state::{compile_history, demo_day, select_uniform, DemoSpec, Source};
use socratic_core::Error;

fn only(set: AdapterSet) -> (StubServer, Arc<HttpModel>) {
    let server = StubServer::start(set).unwrap();
    let model = Arc::new(HttpModel::http(server.url(), &HttpSettings::default()));
    (server, model)
}

/// Every adapter call made through the stub server returns exactly what the
/// mock returns in-process.
#[test]
fn http_round_trip_matches_mocks_bit_for_bit() {
    let world = Arc::new(SyntheticWorld::bundled());
    let lm = Arc::new(MockLm::strong());
    let vlm = Arc::new(MockVlm::new("mock-vlm", world.clone()).with_noise(0.1, 3));
    let alm = Arc::new(MockAlm::new("mock-alm", world.clone()));
    let emb = Arc::new(HashEmbedder::bundled());

    let (_s1, http_lm) = only(AdapterSet { lm_generate: Some(lm.clone()), ..Default::default() });
    let (_s2, http_vlm) = only(AdapterSet { vlm: Some(vlm.clone()), ..Default::default() });
    let (_s3, http_alm) = only(AdapterSet { alm: Some(alm.clone()), ..Default::default() });
    let (_s4, http_emb) = only(AdapterSet { lm_embed: Some(emb.clone()), ..Default::default() });

    let prompt = "Places: kitchen, galley, restaurant kitchen. Objects: coffee maker, mug, kettle. Activities:";
    for params in [CompletionParams::greedy(32), CompletionParams::sampled(0.9, 4, 8).with_stop(",")] {
        assert_eq!(http_lm.complete(prompt, &params).unwrap(), lm.complete(prompt, &params).unwrap());
    }

    let image = MediaRef::image("synth:kitchen;mug@0.5|noise=0.2|seed=4");
    assert_eq!(http_vlm.embed_image(&image).unwrap(), vlm.embed_image(&image).unwrap());
    assert_eq!(
        VisionLanguageModel::embed_text(http_vlm.as_ref(), "coffee maker").unwrap(),
        vlm.embed_text("coffee maker").unwrap()
    );

    let clip = MediaRef::audio("synth:footsteps|say=who is there");
    assert_eq!(http_alm.embed_audio(&clip).unwrap(), alm.embed_audio(&clip).unwrap());
    assert_eq!(http_alm.transcribe(&clip).unwrap(), "who is there");

    let text = "I am making coffee in the kitchen.";
    assert_eq!(http_emb.embed(text).unwrap(), emb.embed(text).unwrap());
}

#[test]
fn http_errors_keep_their_kind() {
    let (_s, http_lm) = only(AdapterSet { lm_generate: Some(Arc::new(MockLm::strong().with_context_tokens(3))), ..Default::default() });
    match http_lm.complete("a b c d", &CompletionParams::greedy(4)) {
        Err(Error::ContextOverflow { size: 4, limit: 3 }) => {}
        other => panic!("{other:?}"),
    }
    let (_s, no_vlm) = only(AdapterSet::default());
    assert!(matches!(no_vlm.embed_image(&MediaRef::image("synth:kitchen")), Err(Error::Backend { .. })));
}

#[test]
fn whole_day_over_http_equals_mock_day() {
    let local = bundled_adapters();
    let world = SyntheticWorld::bundled();
    let vlm = local.vlm().unwrap();
    let day = demo_day(&world, vlm, &DemoSpec { frames_per_scene: 1, ..Default::default() }).unwrap();
    let picks = [0, 4, 9];
    let captioner = EgocentricCaptioner::bundled(CaptionConfig::default(), vlm).unwrap();
    let expected = compile_history(&day.stream, &picks, &captioner, &local, Source::Uniform).unwrap();

    let server = StubServer::start(bundled_adapters()).unwrap();
    let model = Arc::new(HttpModel::http(server.url(), &HttpSettings::default()));
    let remote = AdapterSet {
        lm_generate: Some(model.clone()),
        lm_embed: Some(Arc::new(HashEmbedder::bundled())),
        vlm: Some(model.clone()),
        alm: Some(model),
    };
    let remote_captioner = EgocentricCaptioner::bundled(CaptionConfig::default(), remote.vlm().unwrap()).unwrap();
    let got = compile_history(&day.stream, &picks, &remote_captioner, &remote, Source::Uniform).unwrap();
    assert_eq!(got.to_json(), expected.to_json());
}

#[test]
fn compile_history_keeps_order_and_count() {
    let adapters = bundled_adapters();
    let world = SyntheticWorld::bundled();
    let vlm = adapters.vlm().unwrap();
    let day = demo_day(&world, vlm, &DemoSpec { frames_per_scene: 2, ..Default::default() }).unwrap();
    let captioner = EgocentricCaptioner::bundled(CaptionConfig::default(), vlm).unwrap();

    let picks = [1, 6, 17];
    let h = compile_history(&day.stream, &picks, &captioner, &adapters, Source::Search).unwrap();
    assert_eq!(h.events.len(), 3);
    for (e, &i) in h.events.iter().zip(&picks) {
        assert_eq!(e.t_ms, day.stream.frames()[i].t_ms);
        assert_eq!(e.activities[0].label, day.planted[i]);
        assert!(e.summary.starts_with("I am "), "{}", e.summary);
    }

    let uniform = select_uniform(&day.stream, 3 * DemoSpec::default().step_ms).unwrap();
    let h = compile_history(&day.stream, &uniform, &captioner, &adapters, Source::Uniform).unwrap();
    assert_eq!(h.events.len(), uniform.len());

    assert!(matches!(compile_history(&day.stream, &[], &captioner, &adapters, Source::Uniform), Err(Error::Empty(_))));
    assert!(matches!(
        compile_history(&day.stream, &[3, 2], &captioner, &adapters, Source::Uniform),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn frame_failures_name_the_frame() {
    let adapters = AdapterSet { lm_generate: Some(Arc::new(MockLm::strong().with_context_tokens(5))), ..bundled_adapters() };
    let world = SyntheticWorld::bundled();
    let vlm = adapters.vlm().unwrap();
    let day = demo_day(&world, vlm, &DemoSpec { frames_per_scene: 1, ..Default::default() }).unwrap();
    let captioner = EgocentricCaptioner::bundled(CaptionConfig::default(), vlm).unwrap();
    match compile_history(&day.stream, &[2], &captioner, &adapters, Source::Uniform) {
        Err(Error::AtFrame { index: 2, .. }) => {}
        other => panic!("{other:?}"),
    }
}
