"""Parametric observation surrogate for a forward-pointing camera.

Instead of rendering pixels, the camera emits a small feature vector of the
kind a detection front-end would produce: normalized image coordinates of the
head, an apparent size, and a noisy facing-direction cue. The channels are
deliberately unequal in quality: bearing and elevation are nearly clean,
apparent size carries the per-person head-size confound, and the facing cue
is both attenuated and noisy so relative orientation is the hardest quantity
to recover — hardest of all at long range.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .sim import WorldState, relative_head_state

# Nominal head radius backing the apparent-size channel, meters.
HEAD_SIZE_REF = 0.25

# Targets closer than this sit effectively on the camera; treat as not visible.
MIN_VISIBLE_X = 0.1

N_FEATURES = 6


def features_dim() -> int:
    """Length of the observation vector consumed by the regressors."""
    return N_FEATURES


@dataclass(frozen=True)
class NoiseParams:
    """Per-channel noise levels; all standard deviations, all >= 0."""

    sigma_u: float = 0.05
    sigma_v: float = 0.031
    sigma_size_rel: float = 0.10
    sigma_face_cue: float = 0.07
    distance_noise_gain: float = 0.25

    def __post_init__(self):
        for name in ("sigma_u", "sigma_v", "sigma_size_rel", "sigma_face_cue", "distance_noise_gain"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class CameraParams:
    """Field of view, mounting pitch, noise model, and live-stream seed.

    The default horizontal field of view is wide-angle, as on drone cameras
    built for subject tracking; it keeps the person framed through the
    chase transients the acquisition controller produces.
    """

    hfov: float = 2.6
    vfov: float = 1.0
    mount_pitch: float = 0.0
    noise: NoiseParams = field(default_factory=NoiseParams)
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.hfov < math.pi:
            raise ValueError("hfov must lie in (0, pi)")
        if not 0.0 < self.vfov < math.pi:
            raise ValueError("vfov must lie in (0, pi)")


@dataclass(frozen=True)
class ImageFeatures:
    """One observation: head center in normalized image coordinates, apparent
    size, facing cue, and a visibility flag. All channels are zero when the
    head is outside the frustum."""

    u: float
    v: float
    size: float
    face_cos: float
    face_sin: float
    visible: int

    def __post_init__(self):
        if self.visible == 0 and (self.u, self.v, self.size, self.face_cos, self.face_sin) != (
            0.0,
            0.0,
            0.0,
            0.0,
            0.0,
        ):
            raise ValueError("non-visible observations must be all zeros")

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v, self.size, self.face_cos, self.face_sin, float(self.visible)])


NOT_VISIBLE = ImageFeatures(0.0, 0.0, 0.0, 0.0, 0.0, 0)


def observe(
    world: WorldState,
    cam: CameraParams,
    rng: np.random.Generator | None = None,
) -> ImageFeatures:
    """Observe the person's head through the virtual camera.

    With ``rng`` None the observation is noiseless. Noise is zero-mean per
    channel: fixed standard deviations on the image coordinates, relative
    (hence distance-scaled) on apparent size, and scaled like the attenuated
    signal on the facing cue, whose signal-to-noise therefore stays poor and
    whose absolute scale shrinks with range.
    """
    s = relative_head_state(world)
    dist = math.sqrt(s.s_x * s.s_x + s.s_y * s.s_y + s.s_z * s.s_z)
    if dist <= 0.0 or s.s_x <= MIN_VISIBLE_X:
        return NOT_VISIBLE

    bearing = math.atan2(s.s_y, s.s_x)
    elevation = math.atan2(s.s_z, math.hypot(s.s_x, s.s_y)) - cam.mount_pitch
    u = bearing / (cam.hfov / 2.0)
    v = elevation / (cam.vfov / 2.0)
    if abs(u) > 1.0 or abs(v) > 1.0:
        return NOT_VISIBLE

    size = world.person.profile.head_size_factor * (HEAD_SIZE_REF / dist)
    atten = 1.0 / (1.0 + cam.noise.distance_noise_gain * dist)
    face_cos = math.cos(s.s_theta) * atten
    face_sin = math.sin(s.s_theta) * atten

    if rng is not None:
        n = cam.noise
        draws = rng.standard_normal(5)
        u += n.sigma_u * draws[0]
        v += n.sigma_v * draws[1]
        size += n.sigma_size_rel * size * draws[2]
        face_cos += n.sigma_face_cue * atten * draws[3]
        face_sin += n.sigma_face_cue * atten * draws[4]

    return ImageFeatures(float(u), float(v), float(size), float(face_cos), float(face_sin), 1)


def invert_features(feat: ImageFeatures, cam: CameraParams, head_size_factor: float) -> np.ndarray:
    """Recover (s_x, s_y, s_z) from a noiseless observation of a known profile.

    Used by tests to check the surrogate keeps position information intact;
    not part of any learned pipeline.
    """
    if feat.visible == 0:
        raise ValueError("cannot invert a non-visible observation")
    bearing = feat.u * (cam.hfov / 2.0)
    elevation = feat.v * (cam.vfov / 2.0) + cam.mount_pitch
    dist = head_size_factor * HEAD_SIZE_REF / feat.size
    planar = dist * math.cos(elevation)
    return np.array(
        [planar * math.cos(bearing), planar * math.sin(bearing), dist * math.sin(elevation)]
    )
