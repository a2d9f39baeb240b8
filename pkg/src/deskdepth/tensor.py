"""Dense n-dimensional arrays with reverse-mode automatic differentiation.

numpy carries the raw arithmetic; this module owns the graph. Every op
records its parents and a closure that maps the incoming cotangent to
parent cotangents. ``backward`` walks the graph once in reverse topological
order and accumulates gradients on the leaves.

Reductions delegate to numpy, whose summation order is fixed for a given
shape and memory layout, so losses are bit-reproducible run to run on one
platform. Default dtype is float32; pass float64 explicitly for
finite-difference gradient checks.
"""

from __future__ import annotations

import struct
from typing import Iterable, Optional, Sequence, Union

import numpy as np

DEFAULT_DTYPE = np.float32

Scalar = Union[int, float]
TensorLike = Union["Tensor", np.ndarray, Scalar, Sequence]


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_vjp", "_spent")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        if isinstance(data, Tensor):
            data = data.data
        arr = np.asarray(data, dtype=dtype)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(DEFAULT_DTYPE)
        self.data = arr
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self._parents: tuple = ()
        self._vjp = None
        self._spent = False

    # ------------------------------------------------------------------
    # basic introspection

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype}, requires_grad={self.requires_grad})"

    def __len__(self):
        return self.data.shape[0]

    # ------------------------------------------------------------------
    # graph construction

    @staticmethod
    def _make(data: np.ndarray, parents: tuple, vjp) -> "Tensor":
        out = Tensor.__new__(Tensor)
        out.data = data
        out.grad = None
        out.requires_grad = any(p.requires_grad for p in parents)
        out._spent = False
        if out.requires_grad:
            out._parents = parents
            out._vjp = vjp
        else:
            out._parents = ()
            out._vjp = None
        return out

    def backward(self) -> None:
        """Accumulate d(self)/d(leaf) into ``grad`` of every requires_grad leaf.

        ``self`` must hold exactly one element. Each graph node is visited
        once; calling backward twice on the same root raises.
        """
        if self.size != 1:
            raise ValueError(f"backward requires a scalar loss, got shape {self.shape}")
        if self._spent:
            raise RuntimeError("backward already ran on this graph; re-run the forward pass first")
        if not self.requires_grad:
            raise RuntimeError("loss does not depend on any tensor with requires_grad")
        self._spent = True

        topo: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad and id(p) not in visited:
                    stack.append((p, False))

        grads: dict[int, np.ndarray] = {id(self): np.ones_like(self.data)}
        for node in reversed(topo):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._vjp is not None:
                for parent, pg in zip(node._parents, node._vjp(g)):
                    if not parent.requires_grad or pg is None:
                        continue
                    acc = grads.get(id(parent))
                    grads[id(parent)] = pg if acc is None else acc + pg
            elif node.requires_grad:
                # leaf
                node.grad = g.copy() if node.grad is None else node.grad + g

    # ------------------------------------------------------------------
    # operator sugar

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        return power(self, exponent)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return take_slice(self, key)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis, keepdims)

    def mean(self, axis=None, keepdims=False):
        return tmean(self, axis, keepdims)

    def reshape(self, *shape):
        return reshape(self, shape if len(shape) > 1 or isinstance(shape[0], int) else shape[0])

    def transpose(self, *axes):
        return transpose(self, axes or None)

    def astype(self, dtype):
        return cast(self, dtype)


def as_tensor(x: TensorLike, dtype=None) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(x, dtype=dtype or DEFAULT_DTYPE)


def _coerce_pair(a: TensorLike, b: TensorLike) -> tuple[Tensor, Tensor]:
    if isinstance(a, Tensor) and isinstance(b, Tensor):
        return a, b
    if isinstance(a, Tensor):
        return a, Tensor(np.asarray(b, dtype=a.data.dtype))
    if isinstance(b, Tensor):
        return Tensor(np.asarray(a, dtype=b.data.dtype)), b
    return Tensor(a), Tensor(b)


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum grad down to ``shape``, inverting numpy broadcasting."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


# ----------------------------------------------------------------------
# elementwise arithmetic


def add(a, b):
    a, b = _coerce_pair(a, b)
    out = a.data + b.data

    def vjp(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return Tensor._make(out, (a, b), vjp)


def sub(a, b):
    a, b = _coerce_pair(a, b)
    out = a.data - b.data

    def vjp(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return Tensor._make(out, (a, b), vjp)


def mul(a, b):
    a, b = _coerce_pair(a, b)
    out = a.data * b.data

    def vjp(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return Tensor._make(out, (a, b), vjp)


def div(a, b):
    a, b = _coerce_pair(a, b)
    out = a.data / b.data

    def vjp(g):
        ga = g / b.data
        gb = -g * a.data / (b.data * b.data)
        return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)

    return Tensor._make(out, (a, b), vjp)


def neg(a):
    a = as_tensor(a)
    return Tensor._make(-a.data, (a,), lambda g: (-g,))


def power(a, exponent: Scalar):
    a = as_tensor(a)
    out = a.data ** exponent

    def vjp(g):
        return (g * exponent * a.data ** (exponent - 1),)

    return Tensor._make(out, (a,), vjp)


def exp(a):
    a = as_tensor(a)
    out = np.exp(a.data)
    return Tensor._make(out, (a,), lambda g: (g * out,))


def log(a):
    a = as_tensor(a)
    return Tensor._make(np.log(a.data), (a,), lambda g: (g / a.data,))


def sqrt(a):
    a = as_tensor(a)
    out = np.sqrt(a.data)
    return Tensor._make(out, (a,), lambda g: (g / (2.0 * out),))


def absolute(a):
    a = as_tensor(a)
    return Tensor._make(np.abs(a.data), (a,), lambda g: (g * np.sign(a.data),))


def sin(a):
    a = as_tensor(a)
    return Tensor._make(np.sin(a.data), (a,), lambda g: (g * np.cos(a.data),))


def cos(a):
    a = as_tensor(a)
    return Tensor._make(np.cos(a.data), (a,), lambda g: (-g * np.sin(a.data),))


def relu(a):
    a = as_tensor(a)
    mask = a.data > 0
    return Tensor._make(a.data * mask, (a,), lambda g: (g * mask,))


def leaky_relu(a, slope: float = 0.1):
    a = as_tensor(a)
    mask = a.data > 0
    scale = np.where(mask, np.asarray(1.0, a.data.dtype), np.asarray(slope, a.data.dtype))
    return Tensor._make(a.data * scale, (a,), lambda g: (g * scale,))


def sigmoid(a):
    a = as_tensor(a)
    out = 1.0 / (1.0 + np.exp(-a.data))
    return Tensor._make(out, (a,), lambda g: (g * out * (1.0 - out),))


def softplus(a):
    a = as_tensor(a)
    # overflow-safe: softplus(x) = max(x, 0) + log1p(exp(-|x|))
    out = np.maximum(a.data, 0) + np.log1p(np.exp(-np.abs(a.data)))
    sig = 1.0 / (1.0 + np.exp(-a.data))
    return Tensor._make(out, (a,), lambda g: (g * sig,))


def maximum(a, b):
    a, b = _coerce_pair(a, b)
    out = np.maximum(a.data, b.data)
    # ties route the gradient to the first argument
    pick_a = a.data >= b.data

    def vjp(g):
        return _unbroadcast(g * pick_a, a.shape), _unbroadcast(g * ~pick_a, b.shape)

    return Tensor._make(out, (a, b), vjp)


def minimum(a, b):
    a, b = _coerce_pair(a, b)
    out = np.minimum(a.data, b.data)
    pick_a = a.data <= b.data

    def vjp(g):
        return _unbroadcast(g * pick_a, a.shape), _unbroadcast(g * ~pick_a, b.shape)

    return Tensor._make(out, (a, b), vjp)


def clamp(a, lo=None, hi=None):
    a = as_tensor(a)
    out = np.clip(a.data, lo, hi)
    inside = np.ones_like(a.data, dtype=bool)
    if lo is not None:
        inside &= a.data >= lo
    if hi is not None:
        inside &= a.data <= hi
    return Tensor._make(out, (a,), lambda g: (g * inside,))


def less(a, b) -> Tensor:
    """Strict elementwise ``a < b`` as a constant 0/1 tensor (no gradient)."""
    a, b = _coerce_pair(a, b)
    return Tensor((a.data < b.data).astype(a.data.dtype))


def where_mask(mask: np.ndarray, a, b):
    """Select ``a`` where a boolean numpy mask holds, else ``b``."""
    a, b = _coerce_pair(a, b)
    out = np.where(mask, a.data, b.data)

    def vjp(g):
        return _unbroadcast(g * mask, a.shape), _unbroadcast(g * ~mask, b.shape)

    return Tensor._make(out, (a, b), vjp)


def cast(a, dtype):
    a = as_tensor(a)
    dtype = np.dtype(dtype)
    out = a.data.astype(dtype)
    return Tensor._make(out, (a,), lambda g: (g.astype(a.data.dtype),))


# ----------------------------------------------------------------------
# reductions


def tsum(a, axis=None, keepdims=False):
    a = as_tensor(a)
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def vjp(g):
        if axis is None:
            return (np.broadcast_to(g, a.shape),)
        g_exp = g if keepdims else np.expand_dims(g, axis)
        return (np.broadcast_to(g_exp, a.shape),)

    return Tensor._make(np.asarray(out), (a,), vjp)


def tmean(a, axis=None, keepdims=False):
    a = as_tensor(a)
    if axis is None:
        n = a.size
    else:
        axes = axis if isinstance(axis, tuple) else (axis,)
        n = 1
        for ax in axes:
            n *= a.shape[ax]
    return mul(tsum(a, axis, keepdims), 1.0 / n)


def _lower_median_index(flat: np.ndarray) -> int:
    order = np.argsort(flat, kind="stable")
    return int(order[(flat.size - 1) // 2])


def median(a):
    """Lower median of all elements, as a selection.

    For even counts this returns the lower of the two middle elements, so
    the result is always an element of the input and the gradient routes
    to exactly that element.
    """
    a = as_tensor(a)
    flat = a.data.reshape(-1)
    idx = _lower_median_index(flat)
    out = np.asarray(flat[idx])

    def vjp(g):
        ga = np.zeros_like(flat)
        ga[idx] = g
        return (ga.reshape(a.shape),)

    return Tensor._make(out, (a,), vjp)


def median_rows(a):
    """Row-wise lower median of a 2-D tensor; returns shape (rows, 1)."""
    a = as_tensor(a)
    if a.ndim != 2:
        raise ValueError(f"median_rows expects a 2-D tensor, got shape {a.shape}")
    n = a.shape[1]
    order = np.argsort(a.data, axis=1, kind="stable")
    idx = order[:, (n - 1) // 2]
    rows = np.arange(a.shape[0])
    out = a.data[rows, idx][:, None]

    def vjp(g):
        ga = np.zeros_like(a.data)
        ga[rows, idx] = g[:, 0]
        return (ga,)

    return Tensor._make(out, (a,), vjp)


# ----------------------------------------------------------------------
# shape manipulation


def reshape(a, shape):
    a = as_tensor(a)
    out = a.data.reshape(shape)
    return Tensor._make(out, (a,), lambda g: (g.reshape(a.shape),))


def transpose(a, axes=None):
    a = as_tensor(a)
    out = a.data.transpose(axes)
    if axes is None:
        inv = None
    else:
        inv = np.argsort(axes)
    return Tensor._make(out, (a,), lambda g: (g.transpose(inv),))


def swap_axes(a, ax1, ax2):
    a = as_tensor(a)
    out = np.swapaxes(a.data, ax1, ax2)
    return Tensor._make(out, (a,), lambda g: (np.swapaxes(g, ax1, ax2),))


def take_slice(a, key):
    a = as_tensor(a)
    out = a.data[key]

    def vjp(g):
        ga = np.zeros_like(a.data)
        ga[key] += g
        return (ga,)

    return Tensor._make(out, (a,), vjp)


def concat(tensors: Iterable[Tensor], axis: int = 0):
    tensors = [as_tensor(t) for t in tensors]
    out = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def vjp(g):
        return tuple(np.split(g, splits, axis=axis))

    return Tensor._make(out, tuple(tensors), vjp)


def stack(tensors: Iterable[Tensor], axis: int = 0):
    tensors = [as_tensor(t) for t in tensors]
    out = np.stack([t.data for t in tensors], axis=axis)

    def vjp(g):
        return tuple(np.take(g, i, axis=axis) for i in range(len(tensors)))

    return Tensor._make(out, tuple(tensors), vjp)


def matmul(a, b):
    a, b = _coerce_pair(a, b)
    out = a.data @ b.data

    def vjp(g):
        ga = g @ np.swapaxes(b.data, -1, -2)
        gb = np.swapaxes(a.data, -1, -2) @ g
        return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)

    return Tensor._make(out, (a, b), vjp)


# ----------------------------------------------------------------------
# image ops: convolution, pooling, sampling, resize


def conv2d(x, w, b=None, stride: int = 1, padding: int = 0):
    """2-D convolution, NCHW layout, via im2col + matmul.

    x: (B, Cin, H, W); w: (Cout, Cin, kh, kw); b: (Cout,) or None.
    """
    x, w = as_tensor(x), as_tensor(w)
    B, Cin, H, W = x.shape
    Cout, Cin_w, kh, kw = w.shape
    if Cin != Cin_w:
        raise ValueError(f"conv2d channel mismatch: input {Cin}, kernel {Cin_w}")
    xp = np.pad(x.data, ((0, 0), (0, 0), (padding, padding), (padding, padding))) if padding else x.data
    Hp, Wp = xp.shape[2], xp.shape[3]
    oh = (Hp - kh) // stride + 1
    ow = (Wp - kw) // stride + 1
    windows = np.lib.stride_tricks.sliding_window_view(xp, (kh, kw), axis=(2, 3))
    windows = windows[:, :, ::stride, ::stride]  # (B, Cin, oh, ow, kh, kw)
    cols = windows.transpose(0, 2, 3, 1, 4, 5).reshape(B, oh * ow, Cin * kh * kw)
    wmat = w.data.reshape(Cout, Cin * kh * kw)
    out = cols @ wmat.T  # (B, oh*ow, Cout)
    if b is not None:
        b = as_tensor(b)
        out = out + b.data
    out = out.transpose(0, 2, 1).reshape(B, Cout, oh, ow)
    parents = (x, w) if b is None else (x, w, b)

    def vjp(g):
        gmat = g.reshape(B, Cout, oh * ow).transpose(0, 2, 1)  # (B, oh*ow, Cout)
        gw = np.einsum("bnc,bnk->ck", gmat, cols).reshape(w.shape)
        gcols = gmat @ wmat  # (B, oh*ow, Cin*kh*kw)
        gcols = gcols.reshape(B, oh, ow, Cin, kh, kw).transpose(0, 3, 1, 2, 4, 5)
        gxp = np.zeros((B, Cin, Hp, Wp), dtype=g.dtype)
        for i in range(kh):
            for j in range(kw):
                gxp[:, :, i : i + oh * stride : stride, j : j + ow * stride : stride] += gcols[:, :, :, :, i, j]
        gx = gxp[:, :, padding : Hp - padding, padding : Wp - padding] if padding else gxp
        if b is None:
            return gx, gw
        gb = gmat.sum(axis=(0, 1))
        return gx, gw, gb

    return Tensor._make(out, parents, vjp)


def box_mean3(x):
    """3x3 mean pooling with edge-replicate padding; same-size output.

    Operates on the last two axes of any leading shape.
    """
    x = as_tensor(x)
    H, W = x.shape[-2], x.shape[-1]
    pad = [(0, 0)] * (x.ndim - 2) + [(1, 1), (1, 1)]
    xp = np.pad(x.data, pad, mode="edge")
    out = np.zeros_like(x.data)
    for i in range(3):
        for j in range(3):
            out += xp[..., i : i + H, j : j + W]
    out /= 9.0

    def vjp(g):
        gp = np.zeros_like(xp)
        gs = g / 9.0
        for i in range(3):
            for j in range(3):
                gp[..., i : i + H, j : j + W] += gs
        gx = gp[..., 1:-1, 1:-1].copy()
        # fold replicate-padding contributions back onto the edges
        gx[..., 0, :] += gp[..., 0, 1:-1]
        gx[..., -1, :] += gp[..., -1, 1:-1]
        gx[..., :, 0] += gp[..., 1:-1, 0]
        gx[..., :, -1] += gp[..., 1:-1, -1]
        gx[..., 0, 0] += gp[..., 0, 0]
        gx[..., 0, -1] += gp[..., 0, -1]
        gx[..., -1, 0] += gp[..., -1, 0]
        gx[..., -1, -1] += gp[..., -1, -1]
        return (gx,)

    return Tensor._make(out, (x,), vjp)


def grid_sample(image, grid):
    """Bilinear sampling of ``image`` at normalized ``grid`` locations.

    image: (C, H, W) or (B, C, H, W); grid: (H', W', 2) or (B, H', W', 2)
    with the last axis holding (x, y) in [-1, 1]: -1 maps to pixel 0 and
    +1 to pixel dim-1. Out-of-range coordinates clamp to the border.
    Differentiable in both the image and the grid.
    """
    image, grid = as_tensor(image), as_tensor(grid)
    if grid.shape[-1] != 2:
        raise ValueError(f"grid last dim must be 2, got {grid.shape[-1]}")
    squeeze = image.ndim == 3
    img = image.data[None] if squeeze else image.data
    grd = grid.data[None] if grid.ndim == 3 else grid.data
    B, C, H, W = img.shape
    Hg, Wg = grd.shape[1], grd.shape[2]

    # normalized -> pixel coordinates; coordinates within the arithmetic
    # noise floor of an integer snap to it, so sampling at the identity
    # lattice reproduces pixels bit-exactly
    fx = (grd[..., 0] + 1.0) * 0.5 * (W - 1)
    fy = (grd[..., 1] + 1.0) * 0.5 * (H - 1)
    eps = np.finfo(grd.dtype).eps
    for f, n in ((fx, W), (fy, H)):
        r = np.round(f)
        np.copyto(f, r, where=np.abs(f - r) <= 8 * eps * max(n - 1, 1))
    in_x = (fx >= 0) & (fx <= W - 1)
    in_y = (fy >= 0) & (fy <= H - 1)
    cx = np.clip(fx, 0, W - 1)
    cy = np.clip(fy, 0, H - 1)

    x0 = np.floor(cx).astype(np.int64)
    y0 = np.floor(cy).astype(np.int64)
    x0 = np.minimum(x0, W - 2) if W > 1 else x0 * 0
    y0 = np.minimum(y0, H - 2) if H > 1 else y0 * 0
    x1 = np.minimum(x0 + 1, W - 1)
    y1 = np.minimum(y0 + 1, H - 1)
    tx = (cx - x0).astype(img.dtype)
    ty = (cy - y0).astype(img.dtype)

    bidx = np.arange(B)[:, None, None]
    p00 = img[bidx, :, y0, x0]  # (B, Hg, Wg, C)
    p01 = img[bidx, :, y0, x1]
    p10 = img[bidx, :, y1, x0]
    p11 = img[bidx, :, y1, x1]

    txe = tx[..., None]
    tye = ty[..., None]
    top = p00 * (1 - txe) + p01 * txe
    bot = p10 * (1 - txe) + p11 * txe
    out = (top * (1 - tye) + bot * tye).transpose(0, 3, 1, 2)  # (B, C, Hg, Wg)
    if squeeze:
        out = out[0]

    def vjp(g):
        gg = g[None] if squeeze else g
        gg = gg.transpose(0, 2, 3, 1)  # (B, Hg, Wg, C)
        w00 = ((1 - tx) * (1 - ty))[..., None]
        w01 = (tx * (1 - ty))[..., None]
        w10 = ((1 - tx) * ty)[..., None]
        w11 = (tx * ty)[..., None]

        gimg_hwc = np.zeros((B, H, W, C), dtype=gg.dtype)
        bflat = np.broadcast_to(bidx, y0.shape).reshape(-1)
        for yy, xx, ww in ((y0, x0, w00), (y0, x1, w01), (y1, x0, w10), (y1, x1, w11)):
            np.add.at(gimg_hwc, (bflat, yy.reshape(-1), xx.reshape(-1)),
                      (gg * ww).reshape(-1, C))
        gimg = gimg_hwc.transpose(0, 3, 1, 2)

        # d out / d pixel coords, then chain through normalization and clamp
        gx_pix = ((p01 - p00) * (1 - tye) + (p11 - p10) * tye) * gg
        gy_pix = ((p10 - p00) * (1 - txe) + (p11 - p01) * txe) * gg
        gx_pix = gx_pix.sum(axis=-1) * in_x
        gy_pix = gy_pix.sum(axis=-1) * in_y
        ggrid = np.stack([gx_pix * 0.5 * (W - 1), gy_pix * 0.5 * (H - 1)], axis=-1)

        gi = gimg[0] if squeeze else gimg
        gr = ggrid[0] if grid.ndim == 3 else ggrid
        return gi.astype(image.data.dtype, copy=False), gr.astype(grid.data.dtype, copy=False)

    return Tensor._make(out, (image, grid), vjp)


def _interp_matrix(n_in: int, n_out: int, dtype) -> np.ndarray:
    """(n_out, n_in) corner-aligned linear interpolation matrix."""
    M = np.zeros((n_out, n_in), dtype=dtype)
    if n_out == 1:
        src = np.zeros(1)
    else:
        src = np.arange(n_out) * ((n_in - 1) / (n_out - 1))
    i0 = np.minimum(np.floor(src).astype(np.int64), max(n_in - 2, 0))
    i1 = np.minimum(i0 + 1, n_in - 1)
    t = (src - i0).astype(dtype)
    rows = np.arange(n_out)
    np.add.at(M, (rows, i0), 1 - t)
    np.add.at(M, (rows, i1), t)
    return M


def resize_bilinear(x, out_h: int, out_w: int):
    """Corner-aligned bilinear resize over the last two axes.

    Exact identity when the size is unchanged; preserves constants.
    Implemented as a pair of interpolation-matrix products, so the
    backward pass is the transposed product.
    """
    x = as_tensor(x)
    H, W = x.shape[-2], x.shape[-1]
    if out_h < 1 or out_w < 1:
        raise ValueError("resize_bilinear target extents must be >= 1")
    if out_h == H and out_w == W:
        return Tensor._make(x.data.copy(), (x,), lambda g: (g,))
    R = _interp_matrix(H, out_h, x.data.dtype)
    C = _interp_matrix(W, out_w, x.data.dtype)
    out = R @ x.data @ C.T

    def vjp(g):
        return (R.T @ g @ C,)

    return Tensor._make(out, (x,), vjp)


# ----------------------------------------------------------------------
# serialization: NDTF (n-dimensional tensor format)

_NDTF_MAGIC = b"NDTF"
_DTYPE_CODES = {np.dtype(np.float32): 0, np.dtype(np.float64): 1}
_CODE_DTYPES = {0: np.dtype(np.float32), 1: np.dtype(np.float64)}


class FormatError(ValueError):
    """Raised when a serialized artifact is corrupt or truncated."""


def write_ndtf(fh, array) -> None:
    """Write an array: magic, u8 dtype code, u8 rank, u32 extents, payload.

    All integers and the payload are little-endian.
    """
    arr = array.data if isinstance(array, Tensor) else np.asarray(array)
    if arr.dtype not in _DTYPE_CODES:
        arr = arr.astype(np.float32)
    fh.write(_NDTF_MAGIC)
    fh.write(struct.pack("<BB", _DTYPE_CODES[arr.dtype], arr.ndim))
    fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
    fh.write(arr.astype(arr.dtype.newbyteorder("<"), copy=False).tobytes())


def read_ndtf(fh) -> np.ndarray:
    magic = fh.read(4)
    if magic != _NDTF_MAGIC:
        raise FormatError(f"bad NDTF magic: {magic!r}")
    head = fh.read(2)
    if len(head) != 2:
        raise FormatError("truncated NDTF header")
    code, rank = struct.unpack("<BB", head)
    if code not in _CODE_DTYPES:
        raise FormatError(f"unknown NDTF dtype code {code}")
    ext = fh.read(4 * rank)
    if len(ext) != 4 * rank:
        raise FormatError("truncated NDTF extents")
    shape = struct.unpack(f"<{rank}I", ext)
    dtype = _CODE_DTYPES[code]
    n = int(np.prod(shape)) if rank else 1
    payload = fh.read(n * dtype.itemsize)
    if len(payload) != n * dtype.itemsize:
        raise FormatError("truncated NDTF payload")
    arr = np.frombuffer(payload, dtype=dtype.newbyteorder("<")).astype(dtype)
    return arr.reshape(shape)


def save_ndtf(path, array) -> None:
    with open(path, "wb") as fh:
        write_ndtf(fh, array)


def load_ndtf(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return read_ndtf(fh)
