"""
Radar front end: configuration defaults, scripted hand kinematics and
synthesis of raw ADC cubes from point scatterers.
"""

import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import RangeGateError, SequenceTooShortError
from ..models.config import RadarConfig
from ..models.gesture import AdcCube, GestureKind, GestureScript, NegativeMotion, Scatterer

logger = logging.getLogger(__name__)

SeedLike = Union[int, Sequence[int], np.random.Generator, None]

# Kinematic constants of the scripted hand.
PUSH_DISPLACEMENT = 0.25  # m
SWIPE_HALF_SPAN = math.radians(20.0)
CIRCLE_RADIUS = 0.1  # m
FINGER_OFFSETS = ((-0.02, 0.03), (-0.02, -0.03))  # (range m, azimuth rad) from the palm
FINGER_REFLECTIVITY = 0.5
ARTICULATION_FACTOR = 0.5
BODY_REFLECTIVITY = 2.0
GHOST_EXTRA_RANGE = 0.3
GHOST_REFLECTIVITY = 0.3

# A path maps motion progress u (0 -> 1) to (range, azimuth) arrays of the moving points.
Path = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]


def default_config() -> RadarConfig:
    """Radar configuration matching the reference sensor setup (20 fps, 0.047 m, 0.039 m/s)."""
    return RadarConfig()


def _as_generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _hand_path(script: GestureScript) -> Path:
    """Palm path of a predefined gesture."""
    d0, theta0 = script.anchor_distance, script.anchor_angle
    kind = script.kind

    if kind in (GestureKind.PH, GestureKind.PL):
        sign = -1.0 if kind is GestureKind.PH else 1.0
        start = d0 if kind is GestureKind.PH else d0 - PUSH_DISPLACEMENT

        def path(u):
            return start + sign * PUSH_DISPLACEMENT * u, np.full_like(u, theta0)

    elif kind in (GestureKind.LS, GestureKind.RS):
        # Left swipe moves from the right (+azimuth) to the left.
        sign = -1.0 if kind is GestureKind.LS else 1.0

        def path(u):
            return np.full_like(u, d0), theta0 + sign * SWIPE_HALF_SPAN * (2 * u - 1)

    else:
        sign = -1.0 if kind is GestureKind.CT else 1.0

        def path(u):
            phi = sign * 2 * math.pi * u
            d = d0 + CIRCLE_RADIUS * np.sin(phi)
            lateral = CIRCLE_RADIUS * np.cos(phi)
            return d, theta0 + lateral / d0

    return path


def _negative_path(motion: NegativeMotion, script: GestureScript) -> Tuple[List[Path], float]:
    """Paths of the body parts moving in a negative sample, and their reflectivity."""
    d0, theta0 = script.anchor_distance, script.anchor_angle

    if motion is NegativeMotion.LIFT_ARM:
        offsets = (0.0, 0.06, 0.12)

        def make(off):
            return lambda u: (d0 + 0.15 - 0.15 * u + off * 0.2, theta0 + np.radians(25 + 10 * u) + off)
        return [make(off) for off in offsets], 1.0

    if motion is NegativeMotion.WAVE:
        def wave(u):
            return np.full_like(u, d0), theta0 + math.radians(10) * np.sin(4 * math.pi * u)
        return [wave], 1.0

    if motion is NegativeMotion.WALK:
        spread = (-0.05, 0.0, 0.05)

        def make(off):
            return lambda u: (np.full_like(u, d0 + 0.3 + abs(off)), theta0 + np.radians(-30 + 60 * u) + off)
        return [make(off) for off in spread], BODY_REFLECTIVITY

    if motion is NegativeMotion.SIT_STAND:
        spread = (-0.08, 0.0, 0.08)

        def make(off):
            return lambda u: (d0 + 0.2 + 0.15 * u + abs(off), np.full_like(u, theta0 + off))
        return [make(off) for off in spread], BODY_REFLECTIVITY

    # Turning around: torso points on a small circle, half a revolution.
    phases = (0.0, 2 * math.pi / 3, 4 * math.pi / 3)

    def make(phase):
        def path(u):
            phi = phase + math.pi * u
            d = d0 + 0.3 + 0.15 * np.sin(phi)
            return d, theta0 + 0.15 * np.cos(phi) / (d0 + 0.3)
        return path
    return [make(p) for p in phases], BODY_REFLECTIVITY


def _motion_progress(n_frames: int, speed_scale: float) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    Motion progress per frame.

    Returns:
        (u, moving, n_motion): progress in [0, 1], a mask of frames in motion,
        and the number of frames the motion spans.
    """
    n_motion = max(2, int(round(n_frames / speed_scale)))
    t = np.arange(n_frames, dtype=np.float64)
    u = np.minimum(t / (n_motion - 1), 1.0)
    moving = t <= n_motion - 1
    return u, moving, n_motion


def _sample_path(path: Path, u: np.ndarray, moving: np.ndarray, du_dt: float):
    """Positions and time derivatives of a path at the given progress values."""
    eps = 1e-4
    d, theta = path(u)
    d_hi, th_hi = path(u + eps)
    d_lo, th_lo = path(u - eps)
    d_dot = (np.asarray(d_hi) - np.asarray(d_lo)) / (2 * eps) * du_dt * moving
    th_dot = (np.asarray(th_hi) - np.asarray(th_lo)) / (2 * eps) * du_dt * moving
    return np.asarray(d, dtype=np.float64), np.asarray(theta, dtype=np.float64), d_dot, th_dot


def _check_gate(scatterer: Scatterer, config: RadarConfig) -> None:
    if not 0 < scatterer.range <= config.max_range():
        raise RangeGateError(
            f"scatterer at {scatterer.range:.3f} m leaves the range gate (0, {config.max_range():.3f}] m"
        )
    if abs(scatterer.azimuth) >= math.pi / 2:
        raise RangeGateError(f"azimuth {scatterer.azimuth:.3f} rad is outside the field of view")
    if abs(scatterer.radial_velocity) >= config.max_unambiguous_velocity():
        raise RangeGateError(
            f"radial velocity {scatterer.radial_velocity:.3f} m/s exceeds the unambiguous "
            f"{config.max_unambiguous_velocity():.3f} m/s"
        )
    if scatterer.reflectivity < 0:
        raise RangeGateError("reflectivity must be non-negative")


def gesture_trajectory(script: GestureScript, config: RadarConfig) -> List[List[Scatterer]]:
    """
    Scatterer sets of every frame of a scripted gesture.

    The palm is always the first scatterer of a predefined gesture; finger
    scatterers, the static body, clutter and multipath ghosts follow.

    Raises:
        SequenceTooShortError: if the script spans fewer than 4 frames
        RangeGateError: if any scatterer leaves the kept range bins
    """
    if script.speed_scale <= 0:
        raise ValueError("speed_scale must be positive")
    n_frames = int(round(script.duration * config.frame_rate()))
    if n_frames < 4:
        raise SequenceTooShortError(f"script spans {n_frames} frames, at least 4 are required")

    u, moving, n_motion = _motion_progress(n_frames, script.speed_scale)
    du_dt = 1.0 / ((n_motion - 1) * config.frame_period)

    moving_points: List[Tuple[np.ndarray, np.ndarray, np.ndarray, float]] = []
    body_moves = False
    if script.kind is GestureKind.NG:
        motion = script.negative_motion
        if motion is None:
            rng = np.random.default_rng(script.seed)
            motion = list(NegativeMotion)[rng.integers(len(NegativeMotion))]
        paths, reflectivity = _negative_path(motion, script)
        body_moves = reflectivity == BODY_REFLECTIVITY
        for path in paths:
            d, theta, d_dot, th_dot = _sample_path(path, u, moving, du_dt)
            speed = np.hypot(d_dot, d * th_dot)
            moving_points.append((d, theta, d_dot, reflectivity))
            # Limb articulation shows up as a Doppler spread around the bulk motion.
            moving_points.append((d - 0.02, theta + 0.02, d_dot + ARTICULATION_FACTOR * speed, reflectivity * 0.5))
    else:
        d, theta, d_dot, th_dot = _sample_path(_hand_path(script), u, moving, du_dt)
        speed = np.hypot(d_dot, d * th_dot)
        moving_points.append((d, theta, d_dot, 1.0))
        for (dr, da), sign in zip(FINGER_OFFSETS, (1.0, -1.0)):
            moving_points.append((d + dr, theta + da, d_dot + sign * ARTICULATION_FACTOR * speed, FINGER_REFLECTIVITY))

    static: List[Scatterer] = list(script.clutter)
    if script.body_offset is not None and not body_moves:
        static.append(
            Scatterer(
                range=script.anchor_distance + script.body_offset,
                azimuth=script.anchor_angle,
                reflectivity=BODY_REFLECTIVITY,
            )
        )

    frames: List[List[Scatterer]] = []
    for t in range(n_frames):
        scene = [
            Scatterer(range=float(d[t]), azimuth=float(theta[t]), radial_velocity=float(v[t]), reflectivity=amp)
            for d, theta, v, amp in moving_points
        ]
        scene.extend(static)
        for scatterer in scene:
            _check_gate(scatterer, config)
        if script.multipath:
            for scatterer in list(scene):
                ghost = Scatterer(
                    range=scatterer.range + GHOST_EXTRA_RANGE,
                    azimuth=scatterer.azimuth,
                    radial_velocity=scatterer.radial_velocity,
                    reflectivity=scatterer.reflectivity * GHOST_REFLECTIVITY,
                )
                if ghost.range <= config.max_range():
                    scene.append(ghost)
        frames.append(scene)

    logger.debug("Scripted %s: %d frames, %d in motion", script.kind.name, n_frames, int(moving.sum()))
    return frames


def synthesize_frame(
    config: RadarConfig,
    scatterers: Sequence[Scatterer],
    noise_snr: Optional[float] = None,
    seed: SeedLike = None,
    frame_index: int = 0,
) -> AdcCube:
    """
    Render one frame of complex baseband samples.

    Each scatterer contributes a tone with beat frequency 2*S*d/c along fast
    time, a chirp-to-chirp phase step of 4*pi*v*Tc/lambda and a channel-to-channel
    phase step of 2*pi*l*sin(theta)/lambda. White circular Gaussian noise is
    added at ``noise_snr`` dB below the strongest scatterer's per-sample power.

    Args:
        config: Radar configuration
        scatterers: Point reflectors of this frame
        noise_snr: Signal-to-noise ratio in dB, None disables noise
        seed: Seed or generator for the noise
        frame_index: Index stored in the returned cube

    Returns:
        AdcCube with samples of shape [L, samples_per_chirp, N]
    """
    shape = (config.chirps_per_frame, config.samples_per_chirp, config.rx_channels)
    samples = np.zeros(shape, dtype=np.complex128)

    if scatterers:
        d = np.array([s.range for s in scatterers])
        theta = np.array([s.azimuth for s in scatterers])
        v = np.array([s.radial_velocity for s in scatterers])
        amp = np.array([s.reflectivity for s in scatterers], dtype=np.complex128)
        lam = config.carrier_wavelength

        fast_time = np.arange(config.samples_per_chirp) / config.sample_rate
        beat = 2 * config.chirp_slope * d / config.signal_speed
        fast = np.exp(2j * np.pi * np.outer(beat, fast_time))
        slow = np.exp(1j * np.outer(4 * np.pi * v * config.chirp_interval / lam, np.arange(config.chirps_per_frame)))
        chan = np.exp(1j * np.outer(2 * np.pi * config.element_spacing * np.sin(theta) / lam, np.arange(config.rx_channels)))
        carrier = amp * np.exp(1j * 4 * np.pi * d / lam)

        samples = np.einsum("m,ml,ms,mn->lsn", carrier, slow, fast, chan, optimize=True)

    if noise_snr is not None:
        reference = max((s.reflectivity ** 2 for s in scatterers), default=1.0) or 1.0
        noise_power = reference / (10 ** (noise_snr / 10))
        rng = _as_generator(seed)
        noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        samples = samples + noise * math.sqrt(noise_power / 2)

    return AdcCube(samples=samples, frame_index=frame_index)


def synthesize_scene(
    config: RadarConfig,
    scenes: Sequence[Sequence[Scatterer]],
    noise_snr: Optional[float] = None,
    seed: int = 0,
    first_index: int = 0,
) -> List[AdcCube]:
    """Cubes of consecutive frames; frame t uses noise seed (seed, t)."""
    return [
        synthesize_frame(config, scene, noise_snr, seed=[seed, t], frame_index=t)
        for t, scene in enumerate(scenes, start=first_index)
    ]


def synthesize_script(script: GestureScript, config: RadarConfig) -> List[AdcCube]:
    """All frames of a scripted gesture."""
    return synthesize_scene(config, gesture_trajectory(script, config), script.noise_snr, script.seed)


def expected_bins(scatterer: Scatterer, config: RadarConfig) -> Dict[str, float]:
    """
    Closed-form (unrounded) bin positions of a scatterer.

    Returns:
        Dict with 'range' (d / range resolution), 'doppler' (index after the
        centering shift) and 'angle' (index after the centering shift).
    """
    lam = config.carrier_wavelength
    return {
        "range": scatterer.range / config.range_resolution(),
        "doppler": config.chirps_per_frame / 2 + scatterer.radial_velocity / config.velocity_resolution(),
        "angle": config.angle_fft_size / 2
        + config.angle_fft_size * config.element_spacing * math.sin(scatterer.azimuth) / lam,
    }


def motion_span(script: GestureScript, config: RadarConfig) -> Tuple[int, int]:
    """
    Frame count of a script and how many of its leading frames are in motion.

    Returns:
        (frames, moving_frames)
    """
    n_frames = int(round(script.duration * config.frame_rate()))
    _, moving, _ = _motion_progress(max(n_frames, 1), script.speed_scale)
    return n_frames, int(moving.sum())
