import numpy as np
import pytest

from exceptions import (
    EmptyDatasetError,
    MissingDecoderError,
    ShapeMismatchError,
)
from networks import (
    PerspectiveScaler,
    build_penet,
    build_toy_net,
    density_loss,
    estimate_perspectives,
    finetune_phase3,
    joint_gradcheck,
    train_phase1,
    train_phase2,
)
from perspective import is_row_constant
from schemas import (
    EncoderPathEnum,
    PENetConfigSchema,
    Phase3ConfigSchema,
    Phase3ModeEnum,
    TrainerConfigSchema,
)

FROZEN_PHASE1 = TrainerConfigSchema(epochs=0)


def _section(state, prefix):
    return {k: v for k, v in state.items() if k.startswith(prefix)}


def _assert_same(left, right):
    assert left.keys() == right.keys()
    for name, value in left.items():
        np.testing.assert_array_equal(value, right[name])


def _changed(left, right):
    return any(not np.array_equal(v, right[k]) for k, v in left.items())


@pytest.fixture
def trained_decoder(small_scenes):
    maps = [scene.gt_perspective for scene in small_scenes]
    penet, _ = train_phase1(maps, PENetConfigSchema(), FROZEN_PHASE1)
    return penet


def test_default_widths():
    config = PENetConfigSchema()
    assert config.encoder_channels == [16, 32, 64, 128]
    assert config.decoder_channels == [64, 32, 16, 1]


@pytest.mark.parametrize("height, width", [(32, 32), (64, 48)])
def test_both_paths_keep_the_resolution(rng, height, width):
    penet = build_penet(PENetConfigSchema(), seed=1)
    p = rng.uniform(size=(1, height, width)).astype(np.float32)
    image = rng.uniform(size=(3, height, width)).astype(np.float32)
    for x, which in [(p, EncoderPathEnum.PERSPECTIVE),
                     (image, EncoderPathEnum.IMAGE)]:
        out = penet.forward(x, which)
        assert out.shape == (height, width)
        assert np.all(out >= 0)


def test_zero_weights_give_a_zero_map(rng):
    penet = build_penet(PENetConfigSchema(), seed=0)
    penet.load_state_dict(
        {k: np.zeros_like(v) for k, v in penet.state_dict().items()}
    )
    image = rng.uniform(size=(3, 32, 32)).astype(np.float32)
    np.testing.assert_array_equal(
        penet.forward(image, EncoderPathEnum.IMAGE), 0.0
    )


def test_input_sides_must_divide_by_sixteen():
    penet = build_penet(PENetConfigSchema())
    with pytest.raises(ShapeMismatchError):
        penet.forward(np.zeros((3, 40, 32)), EncoderPathEnum.IMAGE)
    with pytest.raises(ShapeMismatchError):
        penet.forward(np.zeros((3, 32, 32)), EncoderPathEnum.PERSPECTIVE)


def test_same_seed_same_penet():
    first = build_penet(PENetConfigSchema(), seed=6).state_dict()
    second = build_penet(PENetConfigSchema(), seed=6).state_dict()
    _assert_same(first, second)


def test_scaler_maps_training_range_to_unit_interval():
    maps = [np.full((2, 2), 1.0), np.full((2, 2), 5.0)]
    scaler = PerspectiveScaler.fit(maps)
    assert scaler.as_dict() == {"lo": 1.0, "span": 4.0}
    np.testing.assert_allclose(scaler.scale(np.array([1.0, 3.0, 5.0])),
                               [0.0, 0.5, 1.0])
    np.testing.assert_allclose(
        scaler.unscale(scaler.scale(np.array([2.5]))), [2.5]
    )


def test_scaler_degenerate_range_is_identity():
    scaler = PerspectiveScaler.fit([np.full((3, 3), 2.0)])
    assert scaler.as_dict() == {"lo": 0.0, "span": 1.0}
    assert PerspectiveScaler.fit([]).as_dict() == {"lo": 0.0, "span": 1.0}


def test_phase1_reduces_reconstruction_loss(small_scenes):
    maps = [scene.gt_perspective for scene in small_scenes]
    config = PENetConfigSchema()
    trainer = TrainerConfigSchema(learning_rate=1e-5, epochs=3)

    fresh = build_penet(config, seed=trainer.seed)
    fresh.scaler = PerspectiveScaler.fit(maps)
    initial = np.mean(
        [
            density_loss(
                fresh.forward(
                    fresh.scaler.scale(m)[None], EncoderPathEnum.PERSPECTIVE
                ),
                fresh.scaler.scale(m),
            )[0]
            for m in maps
        ]
    )

    penet, report = train_phase1(maps, config, trainer)
    assert penet.decoder_trained
    assert report.phase == 1
    assert len(report.loss_curve) == 3
    assert report.final_loss < initial
    _assert_same(
        _section(penet.state_dict(), "encoder_i"),
        _section(fresh.state_dict(), "encoder_i"),
    )


def test_phase1_needs_maps():
    with pytest.raises(EmptyDatasetError):
        train_phase1([], PENetConfigSchema(), FROZEN_PHASE1)


def test_phase2_needs_a_trained_decoder(small_scenes):
    pairs = [(s.image, s.gt_perspective) for s in small_scenes]
    with pytest.raises(MissingDecoderError):
        train_phase2(pairs, build_penet(PENetConfigSchema()),
                     TrainerConfigSchema(epochs=1))


def test_phase2_trains_only_the_image_encoder(small_scenes, trained_decoder):
    pairs = [(s.image, s.gt_perspective) for s in small_scenes]
    before = trained_decoder.state_dict()
    penet, report = train_phase2(
        pairs, trained_decoder, TrainerConfigSchema(learning_rate=1e-5,
                                                    epochs=1)
    )
    after = penet.state_dict()
    assert report.phase == 2
    _assert_same(_section(after, "decoder"), _section(before, "decoder"))
    _assert_same(_section(after, "encoder_p"), _section(before, "encoder_p"))
    assert _changed(_section(after, "encoder_i"), before)


def test_estimates_are_row_constant(small_scenes, trained_decoder):
    estimates = estimate_perspectives(trained_decoder, small_scenes)
    assert len(estimates) == len(small_scenes)
    for estimate in estimates:
        assert estimate.shape == (32, 32)
        assert is_row_constant(estimate)


def test_ours_a_leaves_the_penet_untouched(
    small_scenes, small_network_config, trained_decoder
):
    net = build_toy_net(small_network_config, seed=0)
    before = trained_decoder.state_dict()
    config = Phase3ConfigSchema(
        mode=Phase3ModeEnum.OURS_A,
        trainer=TrainerConfigSchema(learning_rate=1e-4, epochs=1),
    )
    net, penet, report = finetune_phase3(
        net, trained_decoder, small_scenes, config
    )
    assert report.mode == Phase3ModeEnum.OURS_A
    _assert_same(penet.state_dict(), before)


@pytest.mark.parametrize("supervise", [False, True])
def test_ours_b_keeps_the_decoder_frozen(
    small_scenes, small_network_config, trained_decoder, supervise
):
    net = build_toy_net(small_network_config, seed=0)
    net_before = net.state_dict()
    before = trained_decoder.state_dict()
    config = Phase3ConfigSchema(
        mode=Phase3ModeEnum.OURS_B,
        trainer=TrainerConfigSchema(
            learning_rate=1e-3, weight_decay=1e-2, epochs=1
        ),
        supervise_perspective=supervise,
    )
    net, penet, report = finetune_phase3(
        net, trained_decoder, small_scenes, config
    )
    after = penet.state_dict()
    assert report.phase == 3
    assert report.mode == Phase3ModeEnum.OURS_B
    _assert_same(_section(after, "decoder"), _section(before, "decoder"))
    _assert_same(_section(after, "encoder_p"), _section(before, "encoder_p"))
    assert _changed(_section(after, "encoder_i"), before)
    assert _changed(net.state_dict(), net_before)


def test_ours_b_needs_a_trained_decoder(small_scenes, small_network_config):
    net = build_toy_net(small_network_config, seed=0)
    with pytest.raises(MissingDecoderError):
        finetune_phase3(
            net, build_penet(PENetConfigSchema()), small_scenes,
            Phase3ConfigSchema(mode=Phase3ModeEnum.OURS_B),
        )


def test_phase3_needs_scenes(small_network_config, trained_decoder):
    net = build_toy_net(small_network_config, seed=0)
    with pytest.raises(EmptyDatasetError):
        finetune_phase3(net, trained_decoder, [], Phase3ConfigSchema())


def test_joint_gradients(small_scenes, small_network_config, trained_decoder):
    scene = small_scenes[0]
    net = build_toy_net(
        small_network_config,
        seed=2,
        perspective_maps=[s.gt_perspective for s in small_scenes],
    )
    report = joint_gradcheck(
        net, trained_decoder, scene, max_checks=200, seed=4
    )
    assert report.passed, report.per_parameter
    assert report.checked > 0
    probed = {name.split(".")[0] for name in report.per_parameter}
    assert probed <= {"backbone", "blocks", "head", "penet"}


@pytest.mark.slow
def test_phase1_reconstructs_a_constant_map():
    maps = [np.full((32, 32), 0.5, dtype=np.float32)]
    trainer = TrainerConfigSchema(
        learning_rate=1e-4, momentum=0.9, weight_decay=0.0, epochs=500
    )
    _, report = train_phase1(maps, PENetConfigSchema(), trainer)
    assert report.mae < 0.01, report.loss_curve[-5:]


@pytest.mark.slow
def test_phase2_beats_an_untrained_image_encoder(small_scenes):
    maps = [scene.gt_perspective for scene in small_scenes]
    pairs = [(scene.image, scene.gt_perspective) for scene in small_scenes]
    trainer = TrainerConfigSchema(
        learning_rate=1e-4, momentum=0.9, weight_decay=0.0, epochs=50
    )
    penet, _ = train_phase1(maps, PENetConfigSchema(), trainer)

    _, untrained = train_phase2(
        pairs, penet.copy(), trainer.model_copy(update={"epochs": 0})
    )
    _, trained = train_phase2(pairs, penet.copy(), trainer)
    assert trained.mae < untrained.mae
