import math

import numpy as np
import pytest
import torch

from mmgesture.exceptions import EmptyInputError, FileFormatError, LabelError, ShapeMismatchError, TrainingError
from mmgesture.models.config import ModelConfig, TrainConfig
from mmgesture.models.gesture import DRAISequence, GestureKind, SegmentWindow
from mmgesture.services.augmentation import augment_batch
from mmgesture.services.classifier import (
    GestureNet, backward, evaluate, fit_input_scale, forward, gradient_check, load_checkpoint, loss, predict,
    prepare_input, save_checkpoint, train,
)
from mmgesture.services.corpus import build_synthetic_dataset

TINY = dict(conv_filters=[2, 2, 2], embedding_size=8, recurrent_hidden=8, frame_shape=(8, 8), dropout=0.0)


def _labelled(rng, kinds, length=6, shape=(8, 8)):
    dataset = []
    for kind in kinds:
        array = rng.random((length, *shape)) * 0.1
        for t in range(length):
            array[t, (kind.value + t) % shape[0], (2 * kind.value + t) % shape[1]] += 3.0
        dataset.append(DRAISequence.from_array(array, label=kind))
    return dataset


def _zeroed(model):
    with torch.no_grad():
        for p in model.parameters():
            p.zero_()
    return model


def test_loss_of_uniform_logits():
    assert loss(torch.zeros(7), 3).item() == pytest.approx(math.log(7))


def test_loss_known_value():
    assert loss(torch.tensor([1.0, 2.0, 3.0]), 2).item() == pytest.approx(0.40760596, abs=1e-6)


def test_loss_is_averaged_over_a_batch():
    logits = torch.tensor([[1.0, 2.0, 3.0], [0.0, 0.0, 0.0]])
    expected = (0.40760596 + math.log(3)) / 2
    assert loss(logits, torch.tensor([2, 0])).item() == pytest.approx(expected, abs=1e-6)


def test_loss_rejects_bad_targets():
    with pytest.raises(LabelError):
        loss(torch.zeros(7), 7)
    with pytest.raises(ShapeMismatchError):
        loss(torch.zeros(2, 7), torch.tensor([1]))


def test_loss_gradient_is_softmax_minus_onehot():
    logits = torch.tensor([0.3, -1.2, 2.0, 0.0], dtype=torch.float64, requires_grad=True)
    loss(logits, 1).backward()
    expected = torch.softmax(logits.detach(), dim=0)
    expected[1] -= 1
    torch.testing.assert_close(logits.grad, expected)


def test_parameter_counts():
    assert GestureNet(ModelConfig.lite()).parameter_count() == 47959
    assert GestureNet(ModelConfig.full()).parameter_count() == 204663


def test_filter_counts_follow_the_config():
    model = GestureNet(ModelConfig.lite())
    convs = [m for m in model.frame_encoder if isinstance(m, torch.nn.Conv2d)]
    assert [c.out_channels for c in convs] == [8, 16, 32]
    assert model.recurrent.hidden_size == 64


def test_zero_model_is_uniform(rng):
    model = _zeroed(GestureNet(ModelConfig.lite()))
    seq = DRAISequence.from_array(rng.random((12, 32, 32)))
    prediction = predict(model, seq)
    assert prediction.confidence == pytest.approx(1 / 7)
    assert prediction.label is GestureKind.PH
    assert sum(prediction.probabilities) == pytest.approx(1.0)


def test_forward_accepts_any_length(rng):
    model = GestureNet(ModelConfig(**TINY))
    for length in (1, 5, 50):
        logits = forward(model, DRAISequence.from_array(rng.random((length, 8, 8))))
        assert logits.shape == (7,)
        assert torch.all(torch.isfinite(logits))


def test_prepare_input(rng):
    config = ModelConfig(**TINY)
    seq = DRAISequence.from_array(rng.random((4, 8, 8)) * 5)
    assert prepare_input(config, seq).shape == (4, 8, 8)
    per_sequence = prepare_input(config.model_copy(update={"normalization": "sequence"}), seq)
    assert per_sequence.max().item() == pytest.approx(math.log(2), rel=1e-6)
    with pytest.raises(ShapeMismatchError):
        prepare_input(config, DRAISequence.from_array(rng.random((4, 32, 32))))
    with pytest.raises(EmptyInputError):
        prepare_input(config, DRAISequence(frames=[]))


def test_fit_input_scale():
    seqs = [DRAISequence.from_array(np.full((2, 4, 4), v)) for v in (1.0, 3.0, 0.0, 9.0)]
    assert fit_input_scale(seqs) == pytest.approx(3.0)
    assert fit_input_scale([]) == 1.0


def test_gradients_match_finite_differences(rng):
    torch.manual_seed(0)
    model = GestureNet(ModelConfig(**TINY))
    seq = DRAISequence.from_array(rng.random((3, 8, 8)))
    errors = gradient_check(model, seq, target=4)
    assert errors
    assert max(errors.values()) < 1e-4, errors


def test_zero_input_gives_zero_conv_gradients():
    torch.manual_seed(0)
    model = GestureNet(ModelConfig(**TINY))
    with torch.no_grad():
        for module in model.frame_encoder:
            if isinstance(module, torch.nn.Conv2d):
                module.bias.zero_()
    grads = backward(model, DRAISequence.from_array(np.zeros((3, 8, 8))), 2)
    for name in ("frame_encoder.0.weight", "frame_encoder.4.weight", "frame_encoder.8.weight"):
        assert not torch.any(grads[name])
    assert torch.any(grads["head.bias"])


def test_checkpoint_round_trip(tmp_path, rng):
    torch.manual_seed(1)
    model = GestureNet(ModelConfig.lite(input_scale=2.5))
    model.eval()
    path = tmp_path / "model.digm"
    save_checkpoint(model, path)
    loaded = load_checkpoint(path)
    assert loaded.config == model.config
    assert not loaded.training
    for name, tensor in model.state_dict().items():
        if not name.endswith("num_batches_tracked"):
            assert torch.equal(tensor, loaded.state_dict()[name]), name
    seq = DRAISequence.from_array(rng.random((7, 32, 32)))
    torch.testing.assert_close(forward(model, seq), forward(loaded, seq))


def test_checkpoint_corruption(tmp_path):
    path = tmp_path / "model.digm"
    save_checkpoint(GestureNet(ModelConfig(**TINY)), path)
    data = path.read_bytes()

    bad = tmp_path / "bad.digm"
    bad.write_bytes(b"XXXX" + data[4:])
    with pytest.raises(FileFormatError):
        load_checkpoint(bad)
    bad.write_bytes(data[:-8])
    with pytest.raises(FileFormatError):
        load_checkpoint(bad)
    bad.write_bytes(data + b"\x00" * 4)
    with pytest.raises(FileFormatError):
        load_checkpoint(bad)
    bad.write_bytes(data[:5])
    with pytest.raises(FileFormatError):
        load_checkpoint(bad)


def test_training_is_seeded(rng):
    dataset = _labelled(rng, list(GestureKind))
    config = TrainConfig(learning_rate=1e-3, batch_size=4, steps=6, seed=3)
    model_a, first = train(dataset, ModelConfig(**TINY), config)
    model_b, second = train(dataset, ModelConfig(**TINY), config)
    assert len(first) == 6
    assert first == second
    state_a, state_b = model_a.state_dict(), model_b.state_dict()
    assert state_a.keys() == state_b.keys()
    for name, tensor in state_a.items():
        assert torch.equal(tensor, state_b[name]), name


def test_training_fits_the_input_scale(rng):
    dataset = _labelled(rng, [GestureKind.PH, GestureKind.LS])
    model, curve = train(dataset, ModelConfig(**TINY), TrainConfig(steps=1))
    assert model.config.input_scale == pytest.approx(fit_input_scale(dataset))
    assert not model.training
    assert len(curve) == 1


def test_mixed_lengths_train_in_buckets(rng):
    dataset = _labelled(rng, [GestureKind.PH, GestureKind.PL]) + _labelled(rng, [GestureKind.CT], length=9)
    _, curve = train(dataset, ModelConfig(**TINY), TrainConfig(epochs=2, batch_size=8))
    assert len(curve) == 4


def test_training_errors(rng):
    with pytest.raises(TrainingError):
        train([], ModelConfig(**TINY), TrainConfig())
    unlabelled = DRAISequence.from_array(rng.random((3, 8, 8)))
    with pytest.raises(TrainingError):
        train(_labelled(rng, [GestureKind.PH]) + [unlabelled], ModelConfig(**TINY), TrainConfig())


def test_evaluate_counts_every_sample(rng):
    model = _zeroed(GestureNet(ModelConfig(**TINY)))
    dataset = _labelled(rng, [GestureKind.PH, GestureKind.PH, GestureKind.RS, GestureKind.NG])
    accuracy, confusion = evaluate(model, dataset)
    assert confusion.shape == (7, 7)
    assert confusion.sum() == 4
    assert confusion[:, 0].sum() == 4
    assert accuracy == pytest.approx(0.5)
    with pytest.raises(LabelError):
        evaluate(model, [DRAISequence.from_array(rng.random((3, 8, 8)))])


def test_predict_takes_a_window(rng):
    model = GestureNet(ModelConfig(**TINY))
    seq = _labelled(rng, [GestureKind.LS])[0]
    window = SegmentWindow(start_frame=4, end_frame=9, frames=seq)
    assert predict(model, window) == predict(model, seq)


@pytest.mark.slow
def test_small_set_can_be_memorised(rng):
    dataset = _labelled(rng, list(GestureKind), length=10, shape=(32, 32))
    model_cfg = ModelConfig.lite(dropout=0.0)
    _, curve = train(dataset, model_cfg, TrainConfig(learning_rate=3e-3, epochs=400, seed=0))
    assert min(curve) < 0.01


@pytest.mark.slow
def test_augmented_synthetic_training_generalises(settings):
    kinds = list(GestureKind)
    base, archives = build_synthetic_dataset(kinds, 24, settings, seed=1)
    policy = settings.augment.model_copy(update={"variants_per_input": 3})
    variants = augment_batch(base, policy, seed=2, archives=archives, config=settings.radar, params=settings.pipeline)
    training = base + variants
    assert len(training) >= 600

    held_out, _ = build_synthetic_dataset(kinds, 18, settings, seed=3)
    assert len(held_out) >= 120

    train_cfg = TrainConfig(learning_rate=1e-3, batch_size=32, epochs=40, augmented=True, seed=0)
    model, curve = train(training, ModelConfig.lite(), train_cfg)
    assert curve[-1] < curve[0]

    accuracy, confusion = evaluate(model, held_out)
    assert accuracy >= 0.9
    push, negative = GestureKind.PH.value, GestureKind.NG.value
    assert confusion[push].argmax() == push
    assert confusion[negative].argmax() == negative
