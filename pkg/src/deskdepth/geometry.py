"""Pinhole camera geometry and differentiable view synthesis.

Conventions, fixed for the whole package:
  - pixel coordinates are (u, v) = (column, row), origin at the top-left,
    integer coordinates at pixel centers;
  - sampling grids are normalized so -1 maps to pixel 0 and +1 to pixel
    dim-1 on each axis;
  - a pose maps target-frame points into the other frame's coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import counters
from . import tensor as T
from .tensor import Tensor

ScalarLike = Union[float, Tensor]

# floor for the depth of projected points before the perspective divide;
# points warped behind the camera would otherwise yield NaN gradients
Z_CLAMP = 1e-3


def _value(x) -> np.ndarray:
    return x.data if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)


@dataclass
class CameraIntrinsics:
    """Pinhole parameters in pixels. Fields may be floats or scalar
    (optionally batched) tensors so that predicted intrinsics stay
    differentiable."""

    fx: ScalarLike
    fy: ScalarLike
    cx: ScalarLike
    cy: ScalarLike
    width: int
    height: int

    def __post_init__(self):
        fx, fy = _value(self.fx), _value(self.fy)
        cx, cy = _value(self.cx), _value(self.cy)
        if not (np.all(fx > 0) and np.all(fy > 0)):
            raise ValueError("focal lengths must be positive")
        if not (np.all(cx >= 0) and np.all(cx < self.width)):
            raise ValueError(f"principal point x out of [0, {self.width})")
        if not (np.all(cy >= 0) and np.all(cy < self.height)):
            raise ValueError(f"principal point y out of [0, {self.height})")

    def scaled(self, sx: float, sy: float, dx: float = 0.0, dy: float = 0.0,
               width: int | None = None, height: int | None = None) -> "CameraIntrinsics":
        """Intrinsics after cropping by (dx, dy) pixels then scaling by (sx, sy)."""
        return CameraIntrinsics(
            fx=self.fx * sx, fy=self.fy * sy,
            cx=(self.cx - dx) * sx, cy=(self.cy - dy) * sy,
            width=width if width is not None else int(round(self.width * sx)),
            height=height if height is not None else int(round(self.height * sy)),
        )


@dataclass
class RigidPose:
    """SE(3) transform: rotation (..., 3, 3) and translation (..., 3)."""

    rotation: Tensor
    translation: Tensor
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        self.rotation = T.as_tensor(self.rotation)
        self.translation = T.as_tensor(self.translation)
        if self.check:
            R = self.rotation.data
            eye = np.eye(3, dtype=R.dtype)
            err = np.abs(np.swapaxes(R, -1, -2) @ R - eye).max()
            if err > 1e-5:
                raise ValueError(f"rotation is not orthonormal (|R^T R - I| = {err:.2e})")
            det = np.linalg.det(R.astype(np.float64))
            if np.abs(det - 1.0).max() > 1e-5:
                raise ValueError("rotation must have determinant +1")

    @staticmethod
    def identity(dtype=np.float32) -> "RigidPose":
        return RigidPose(Tensor(np.eye(3, dtype=dtype)), Tensor(np.zeros(3, dtype=dtype)), check=False)

    def inverse(self) -> "RigidPose":
        Rt = T.swap_axes(self.rotation, -1, -2)
        t = T.neg(T.matmul(Rt, self.translation[..., None])[..., 0])
        return RigidPose(Rt, t, check=False)

    def compose(self, other: "RigidPose") -> "RigidPose":
        """Returns self ∘ other: apply ``other`` first, then ``self``."""
        R = T.matmul(self.rotation, other.rotation)
        t = T.matmul(self.rotation, other.translation[..., None])[..., 0] + self.translation
        return RigidPose(R, t, check=False)


@dataclass
class DepthMap:
    """Positive per-pixel depth in scene units."""

    values: Tensor

    def __post_init__(self):
        self.values = T.as_tensor(self.values)
        if np.any(self.values.data <= 0):
            raise ValueError("depth must be strictly positive")


def intrinsics_matrix(K: CameraIntrinsics, dtype=np.float32) -> Tensor:
    """3x3 [[fx,0,cx],[0,fy,cy],[0,0,1]]; batched if the fields are batched."""
    fx, fy = T.as_tensor(K.fx, dtype), T.as_tensor(K.fy, dtype)
    cx, cy = T.as_tensor(K.cx, dtype), T.as_tensor(K.cy, dtype)
    zero = Tensor(np.zeros(fx.shape, dtype))
    one = Tensor(np.ones(fx.shape, dtype))
    rows = [
        T.stack([fx, zero, cx], axis=-1),
        T.stack([zero, fy, cy], axis=-1),
        T.stack([zero, zero, one], axis=-1),
    ]
    return T.stack(rows, axis=-2)


def _skew(v: Tensor) -> Tensor:
    """(..., 3) -> (..., 3, 3) cross-product matrix."""
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    zero = Tensor(np.zeros(x.shape, x.dtype))
    rows = [
        T.stack([zero, T.neg(z), y], axis=-1),
        T.stack([z, zero, T.neg(x)], axis=-1),
        T.stack([T.neg(y), x, zero], axis=-1),
    ]
    return T.stack(rows, axis=-2)


def rotation_from_axis_angle(axis_angle: Tensor) -> Tensor:
    """Rodrigues' rotation for (..., 3) axis-angle vectors.

    The angle is regularized with a 1e-20 additive term under the square
    root so the decode at exactly zero is the exact identity with finite
    gradients.
    """
    aa = T.as_tensor(axis_angle)
    angle = T.sqrt(T.tsum(aa * aa, axis=-1, keepdims=True) + 1e-20)
    axis = aa / angle
    ca = T.cos(angle)[..., None]
    sa = T.sin(angle)[..., None]
    K = _skew(axis)
    outer = axis[..., :, None] * axis[..., None, :]
    eye = Tensor(np.broadcast_to(np.eye(3, dtype=aa.dtype), K.shape).copy())
    return eye * ca + outer * (1.0 - ca) + K * sa


def se3_from_axis_angle(axis_angle, translation, invert: bool = False) -> RigidPose:
    """Pose from an axis-angle rotation and a translation.

    With ``invert`` the returned pose is the inverse transform, the usual
    convention for the backward-in-time support frame.
    """
    aa = T.as_tensor(axis_angle)
    t = T.as_tensor(translation)
    R = rotation_from_axis_angle(aa)
    if invert:
        Rt = T.swap_axes(R, -1, -2)
        t = T.neg(T.matmul(Rt, t[..., None])[..., 0])
        R = Rt
    return RigidPose(R, t, check=False)


def _pixel_lattice(h: int, w: int, dtype) -> np.ndarray:
    """Homogeneous pixel coordinates (3, h*w): rows (u, v, 1)."""
    u, v = np.meshgrid(np.arange(w, dtype=dtype), np.arange(h, dtype=dtype))
    return np.stack([u.reshape(-1), v.reshape(-1), np.ones(h * w, dtype=dtype)])


def backproject(depth, K: CameraIntrinsics) -> Tensor:
    """Lift a depth map to homogeneous camera-space points.

    depth: (..., H, W) positive -> points (..., 4, H*W) where
    point(u,v) = depth(u,v) * K^-1 (u, v, 1)^T with a trailing 1.
    """
    d = T.as_tensor(depth.values if isinstance(depth, DepthMap) else depth)
    h, w = d.shape[-2], d.shape[-1]
    batch = d.shape[:-2]
    pix = Tensor(_pixel_lattice(h, w, d.dtype))
    # closed-form inverse of the intrinsics matrix
    fx, fy = T.as_tensor(K.fx, d.dtype), T.as_tensor(K.fy, d.dtype)
    cx, cy = T.as_tensor(K.cx, d.dtype), T.as_tensor(K.cy, d.dtype)
    x = (pix[0] - cx[..., None]) / fx[..., None]
    y = (pix[1] - cy[..., None]) / fy[..., None]
    ones_shape = np.broadcast_shapes(x.shape, batch + (h * w,))
    one = Tensor(np.ones(ones_shape, d.dtype))
    rays = T.stack([x + Tensor(np.zeros(ones_shape, d.dtype)),
                    y + Tensor(np.zeros(ones_shape, d.dtype)), one], axis=-2)
    pts = rays * d.reshape(batch + (1, h * w))
    return T.concat([pts, one[..., None, :]], axis=-2)


def project(points: Tensor, K: CameraIntrinsics, pose: RigidPose,
            height: int | None = None, width: int | None = None) -> Tensor:
    """Transform points, apply intrinsics, and build a normalized grid.

    points: (..., 4, N) -> grid (..., H, W, 2) in [-1, 1]. The depth of
    transformed points is clamped to Z_CLAMP before the divide.
    """
    pts = T.as_tensor(points)
    h = height if height is not None else K.height
    w = width if width is not None else K.width
    xyz = pts[..., :3, :]
    cam = T.matmul(pose.rotation, xyz) + pose.translation[..., :, None]
    Km = intrinsics_matrix(K, dtype=pts.dtype)
    pix = T.matmul(Km, cam)
    z = T.clamp(pix[..., 2:3, :], lo=Z_CLAMP)
    uv = pix[..., :2, :] / z
    u = uv[..., 0, :] * (2.0 / (w - 1)) - 1.0
    v = uv[..., 1, :] * (2.0 / (h - 1)) - 1.0
    grid = T.stack([u, v], axis=-1)
    return grid.reshape(pts.shape[:-2] + (h, w, 2))


def identity_grid(h: int, w: int, dtype=np.float32) -> np.ndarray:
    """The normalized grid that samples every pixel at its own center."""
    u = np.linspace(-1.0, 1.0, w, dtype=dtype)
    v = np.linspace(-1.0, 1.0, h, dtype=dtype)
    uu, vv = np.meshgrid(u, v)
    return np.stack([uu, vv], axis=-1)


def _is_constant_identity(pose: RigidPose) -> bool:
    if pose.rotation.requires_grad or pose.translation.requires_grad:
        return False
    R, t = pose.rotation.data, pose.translation.data
    eye = np.eye(3, dtype=R.dtype)
    return bool(np.all(R == eye) and not np.any(t))


def synthesize_view(source, disparity, pose: RigidPose, K: CameraIntrinsics) -> Tensor:
    """Reconstruct the target frame by warping a support frame.

    Inverts disparity to depth, projects through the relative pose and
    intrinsics, and bilinearly samples the support image at the resulting
    grid. Differentiable w.r.t. the image, disparity, pose parameters and
    intrinsics.

    source: (..., C, H, W); disparity: (..., H, W) strictly positive.
    """
    counters.bump("warp_constructed")
    src = T.as_tensor(source)
    disp = T.as_tensor(disparity)
    h, w = disp.shape[-2], disp.shape[-1]
    if _is_constant_identity(pose):
        # At the identity the projection cancels symbolically for any
        # disparity and intrinsics, so the warp must be bit-exact; the
        # generic path would drift off pixel centers by float round-off.
        # The output is constant in disparity and intrinsics here, and the
        # requires_grad guard keeps learned poses on the generic path.
        grid = Tensor(identity_grid(h, w, disp.dtype))
        return T.grid_sample(src, grid)
    depth = 1.0 / disp
    pts = backproject(depth, K)
    grid = project(pts, K, pose, height=h, width=w)
    return T.grid_sample(src, grid)
