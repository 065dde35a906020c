"""
Gesture classifier: a per-frame convolution stack feeding an LSTM over the
frame embeddings, trained with softmax cross-entropy.
"""

import copy
import json
import logging
import struct
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import torch
from torch import nn, optim

from ..exceptions import EmptyInputError, FileFormatError, LabelError, ShapeMismatchError, TrainingError
from ..models.config import ModelConfig, TrainConfig
from ..models.gesture import DRAISequence, GestureKind, Prediction, SegmentWindow

logger = logging.getLogger(__name__)

CHECKPOINT_MAGIC = b"DIGM"
CHECKPOINT_VERSION = 1


class GestureNet(nn.Module):
    """Frame CNN + sequence LSTM + linear head."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        layers: List[nn.Module] = []
        channels = 1
        for filters in config.conv_filters:
            layers += [
                nn.Conv2d(channels, filters, config.kernel_size, padding=config.kernel_size // 2),
                nn.BatchNorm2d(filters),
                nn.ReLU(),
                nn.MaxPool2d(2),
            ]
            channels = filters
        self.frame_encoder = nn.Sequential(*layers)
        factor = 2 ** len(config.conv_filters)
        flat = channels * (config.frame_shape[0] // factor) * (config.frame_shape[1] // factor)
        self.embedding = nn.Sequential(
            nn.Flatten(),
            nn.Linear(flat, config.embedding_size),
            nn.ReLU(),
            nn.Dropout(config.dropout),
        )
        self.recurrent = nn.LSTM(config.embedding_size, config.recurrent_hidden, batch_first=True)
        self.head = nn.Linear(config.recurrent_hidden, config.classes)

    def forward(self, frames: torch.Tensor, lengths: Optional[torch.Tensor] = None) -> torch.Tensor:
        """
        Args:
            frames: Normalized DRAIs [B, T, H, W]
            lengths: True length of each sample; defaults to T for all

        Returns:
            Logits [B, C] taken from each sample's last true step
        """
        batch, steps, height, width = frames.shape
        encoded = self.frame_encoder(frames.reshape(batch * steps, 1, height, width))
        embedded = self.embedding(encoded).reshape(batch, steps, -1)
        outputs, _ = self.recurrent(embedded)
        if lengths is None:
            last = outputs[:, -1]
        else:
            last = outputs[torch.arange(batch), lengths.long() - 1]
        return self.head(last)

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())


def fit_input_scale(dataset: Sequence[DRAISequence]) -> float:
    """Median of the per-sequence maxima, the fixed dataset-wide scale."""
    peaks = [float(seq.stack().max()) for seq in dataset if len(seq)]
    peaks = [p for p in peaks if p > 0]
    return float(np.median(peaks)) if peaks else 1.0


def prepare_input(config: ModelConfig, seq: DRAISequence, dtype: torch.dtype = torch.float32) -> torch.Tensor:
    """Frames [T, H, W] after log1p(x / scale) normalization."""
    if len(seq) == 0:
        raise EmptyInputError("cannot classify an empty sequence")
    array = seq.stack()
    if tuple(array.shape[1:]) != tuple(config.frame_shape):
        raise ShapeMismatchError(f"frame shape {array.shape[1:]} does not match model {config.frame_shape}")
    if config.normalization == "sequence":
        scale = float(array.max()) or 1.0
    else:
        scale = config.input_scale
    return torch.as_tensor(np.log1p(np.clip(array, 0, None) / scale), dtype=dtype)


def forward(model: GestureNet, seq: DRAISequence) -> torch.Tensor:
    """Logits of one sequence in inference mode, shape [C]."""
    model.eval()
    dtype = next(model.parameters()).dtype
    with torch.no_grad():
        return model(prepare_input(model.config, seq, dtype).unsqueeze(0))[0]


def loss(logits: torch.Tensor, target: Union[int, torch.Tensor]) -> torch.Tensor:
    """
    Cross-entropy -Y[c] + log(sum_j exp(Y[j])), averaged over a batch.

    Args:
        logits: [C] or [B, C]
        target: Class id, or [B] class ids
    """
    batched = logits.unsqueeze(0) if logits.dim() == 1 else logits
    targets = torch.as_tensor(target, dtype=torch.long).reshape(-1)
    classes = batched.shape[1]
    if targets.numel() != batched.shape[0]:
        raise ShapeMismatchError("one target per row of logits is required")
    if bool(((targets < 0) | (targets >= classes)).any()):
        raise LabelError(f"class id out of range [0, {classes})")
    picked = batched.gather(1, targets.unsqueeze(1)).squeeze(1)
    return (torch.logsumexp(batched, dim=1) - picked).mean()


def backward(model: GestureNet, seq: DRAISequence, target: int) -> Dict[str, torch.Tensor]:
    """Gradient of the loss on one sequence for every named parameter, dropout off."""
    was_training = model.training
    model.eval()
    model.zero_grad()
    dtype = next(model.parameters()).dtype
    value = loss(model(prepare_input(model.config, seq, dtype).unsqueeze(0))[0], target)
    value.backward()
    grads = {name: p.grad.detach().clone() for name, p in model.named_parameters()}
    model.train(was_training)
    return grads


def gradient_check(
    model: GestureNet, seq: DRAISequence, target: int, eps: float = 1e-6, floor: float = 1e-4
) -> Dict[str, float]:
    """
    Compare backpropagated gradients with central finite differences.

    Runs on a float64 copy of the model. Returns, for every parameter
    tensor, ||analytic - numeric|| / max(||analytic||, ||numeric||, floor).
    """
    reference = copy.deepcopy(model).double()
    analytic = backward(reference, seq, target)
    reference.eval()
    frames = prepare_input(reference.config, seq, torch.float64).unsqueeze(0)

    errors: Dict[str, float] = {}
    with torch.no_grad():
        for name, param in reference.named_parameters():
            numeric = torch.zeros_like(param)
            flat_param = param.view(-1)
            flat_numeric = numeric.view(-1)
            for i in range(flat_param.numel()):
                original = flat_param[i].item()
                flat_param[i] = original + eps
                plus = loss(reference(frames)[0], target).item()
                flat_param[i] = original - eps
                minus = loss(reference(frames)[0], target).item()
                flat_param[i] = original
                flat_numeric[i] = (plus - minus) / (2 * eps)
            scale = max(analytic[name].norm().item(), numeric.norm().item(), floor)
            errors[name] = (analytic[name] - numeric).norm().item() / scale
    return errors


def _buckets(dataset: Sequence[DRAISequence], batch_size: int, rng: np.random.Generator) -> List[List[int]]:
    """Shuffled batches of sample indices, each batch holding a single sequence length."""
    by_length: Dict[int, List[int]] = {}
    for index, seq in enumerate(dataset):
        by_length.setdefault(len(seq), []).append(index)
    batches: List[List[int]] = []
    for length in sorted(by_length):
        indices = rng.permutation(by_length[length]).tolist()
        batches += [indices[i: i + batch_size] for i in range(0, len(indices), batch_size)]
    order = rng.permutation(len(batches))
    return [batches[i] for i in order]


def train(
    dataset: Sequence[DRAISequence], model_cfg: ModelConfig, train_cfg: TrainConfig
) -> Tuple[GestureNet, List[float]]:
    """
    Train a fresh model with Adam on length-bucketed mini-batches.

    Returns:
        (model in eval mode, loss of every optimizer step)
    """
    if not dataset:
        raise TrainingError("cannot train on an empty dataset")
    if any(seq.label is None for seq in dataset):
        raise TrainingError("every training sequence needs a label")

    torch.manual_seed(train_cfg.seed)
    rng = np.random.default_rng(train_cfg.seed)
    if model_cfg.normalization == "dataset":
        model_cfg = model_cfg.model_copy(update={"input_scale": fit_input_scale(dataset)})

    model = GestureNet(model_cfg)
    optimizer = optim.Adam(model.parameters(), lr=train_cfg.learning_rate)
    inputs = [prepare_input(model_cfg, seq) for seq in dataset]
    labels = torch.tensor([seq.label.value for seq in dataset], dtype=torch.long)

    curve: List[float] = []
    epochs = train_cfg.resolved_epochs()
    logger.info(
        "Training %d parameters on %d sequences for %d epochs", model.parameter_count(), len(dataset), epochs
    )
    model.train()
    for epoch in range(epochs):
        for batch in _buckets(dataset, train_cfg.batch_size, rng):
            optimizer.zero_grad()
            value = loss(model(torch.stack([inputs[i] for i in batch])), labels[batch])
            if not torch.isfinite(value):
                raise TrainingError(
                    f"loss became {value.item()} at epoch {epoch}, step {len(curve)}; "
                    f"lower the learning rate (now {train_cfg.learning_rate})"
                )
            value.backward()
            optimizer.step()
            curve.append(value.item())
            if train_cfg.steps is not None and len(curve) >= train_cfg.steps:
                break
        if train_cfg.steps is not None and len(curve) >= train_cfg.steps:
            break
        logger.debug("Epoch %d loss %.4f", epoch, curve[-1])
    model.eval()
    return model, curve


def predict(model: GestureNet, segment: Union[SegmentWindow, DRAISequence]) -> Prediction:
    """Most probable class of a segment with the full softmax."""
    seq = segment.frames if isinstance(segment, SegmentWindow) else segment
    probabilities = torch.softmax(forward(model, seq).double(), dim=0)
    index = int(torch.argmax(probabilities))
    return Prediction(
        label=GestureKind(index),
        confidence=float(probabilities[index]),
        probabilities=tuple(probabilities.tolist()),
    )


def evaluate(model: GestureNet, dataset: Sequence[DRAISequence]) -> Tuple[float, np.ndarray]:
    """Accuracy and confusion matrix (rows true class, columns predicted)."""
    classes = model.config.classes
    confusion = np.zeros((classes, classes), dtype=int)
    for seq in dataset:
        if seq.label is None:
            raise LabelError("evaluation needs labeled sequences")
        confusion[seq.label.value, predict(model, seq).label.value] += 1
    total = confusion.sum()
    accuracy = float(np.trace(confusion) / total) if total else 0.0
    return accuracy, confusion


def _stored_tensors(model: GestureNet) -> List[Tuple[str, torch.Tensor]]:
    return [(name, t) for name, t in model.state_dict().items() if not name.endswith("num_batches_tracked")]


def save_checkpoint(model: GestureNet, path: Union[str, Path]) -> None:
    """
    Write a model file: magic, version, JSON config block, parameter count,
    then every parameter and running statistic as little-endian float32.
    """
    block = json.dumps(model.config.model_dump(mode="json")).encode("utf-8")
    with open(path, "wb") as f:
        f.write(struct.pack("<4sHI", CHECKPOINT_MAGIC, CHECKPOINT_VERSION, len(block)))
        f.write(block)
        f.write(struct.pack("<I", model.parameter_count()))
        for _, tensor in _stored_tensors(model):
            f.write(tensor.detach().cpu().numpy().astype("<f4").tobytes())
    logger.info("Saved checkpoint %s", path)


def load_checkpoint(path: Union[str, Path]) -> GestureNet:
    """Read a model file written by ``save_checkpoint``; the model is returned in eval mode."""
    with open(path, "rb") as f:
        data = f.read()
    header = struct.calcsize("<4sHI")
    if len(data) < header:
        raise FileFormatError(f"{path}: truncated header")
    magic, version, block_len = struct.unpack_from("<4sHI", data)
    if magic != CHECKPOINT_MAGIC:
        raise FileFormatError(f"{path}: bad magic {magic!r}")
    if version != CHECKPOINT_VERSION:
        raise FileFormatError(f"{path}: unsupported version {version}")
    offset = header + block_len
    try:
        config = ModelConfig.model_validate(json.loads(data[header:offset].decode("utf-8")))
        (count,) = struct.unpack_from("<I", data, offset)
    except (ValueError, struct.error) as e:
        raise FileFormatError(f"{path}: unreadable config block: {e}") from e
    offset += 4

    model = GestureNet(config)
    if count != model.parameter_count():
        raise FileFormatError(f"{path}: stores {count} parameters, config implies {model.parameter_count()}")
    state = {}
    for name, tensor in _stored_tensors(model):
        size = tensor.numel() * 4
        if offset + size > len(data):
            raise FileFormatError(f"{path}: truncated at tensor {name}")
        values = np.frombuffer(data, dtype="<f4", count=tensor.numel(), offset=offset)
        state[name] = torch.from_numpy(values.astype(np.float32).reshape(tensor.shape))
        offset += size
    if offset != len(data):
        raise FileFormatError(f"{path}: {len(data) - offset} trailing bytes")
    model.load_state_dict(state, strict=False)
    model.eval()
    return model
