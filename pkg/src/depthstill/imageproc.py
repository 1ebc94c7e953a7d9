"""Image kernels: bilateral depth sharpening, square dilation and inpainting."""

from __future__ import annotations

import heapq
import math

import numba
import numpy as np

KNOWN, BAND, INSIDE = 0, 1, 2
_FAR = 1.0e6


def _check_odd(kernel: int, name: str = "kernel"):
    if kernel < 1 or kernel % 2 == 0:
        raise ValueError(f"{name} must be an odd positive size, got {kernel}")


def bilateral_filter_depth(
    depth: np.ndarray,
    kernel: int = 5,
    sigma_space: float = 1.0,
    sigma_value: float = 5.0,
    iterations: int = 2,
) -> np.ndarray:
    """Edge-preserving smoothing of a depth map.

    Every output pixel is the average of its ``kernel x kernel`` neighbourhood
    weighted by ``exp(-d^2 / 2 sigma_space^2) * exp(-dz^2 / 2 sigma_value^2)``.
    Neighbours outside the image are dropped, not padded.
    """
    _check_odd(kernel)
    if not (sigma_space > 0 and sigma_value > 0):
        raise ValueError("sigmas must be positive")
    if iterations < 0:
        raise ValueError("iterations must be >= 0")

    out = np.array(depth, dtype=np.float64, copy=True)
    r = kernel // 2
    h, w = out.shape
    for _ in range(iterations):
        padded = np.pad(out, r, constant_values=np.nan)
        num = np.zeros_like(out)
        den = np.zeros_like(out)
        lo = out.copy()
        hi = out.copy()
        for dy in range(-r, r + 1):
            for dx in range(-r, r + 1):
                nb = padded[r + dy : r + dy + h, r + dx : r + dx + w]
                inside = ~np.isnan(nb)
                diff = np.where(inside, nb - out, 0.0)
                wgt = math.exp(-(dx * dx + dy * dy) / (2.0 * sigma_space**2)) * np.exp(
                    -(diff * diff) / (2.0 * sigma_value**2)
                )
                wgt[~inside] = 0.0
                num += wgt * diff
                den += wgt
                np.fmin(lo, nb, out=lo)
                np.fmax(hi, nb, out=hi)
        # centre + weighted mean offset keeps constant regions bit-exact
        out = np.clip(out + num / den, lo, hi)
    return out


def dilate(mask: np.ndarray, kernel: int = 3) -> np.ndarray:
    """Binary dilation with a full square structuring element; outside is False."""
    _check_odd(kernel)
    mask = np.asarray(mask, dtype=bool)
    r = kernel // 2
    h, w = mask.shape
    padded = np.pad(mask, r, constant_values=False)
    out = np.zeros_like(mask)
    for dy in range(kernel):
        for dx in range(kernel):
            out |= padded[dy : dy + h, dx : dx + w]
    return out


@numba.njit(cache=True)
def _solve(i1, j1, i2, j2, flags, dist):
    h, w = flags.shape
    ok1 = 0 <= i1 < h and 0 <= j1 < w and flags[i1, j1] != INSIDE
    ok2 = 0 <= i2 < h and 0 <= j2 < w and flags[i2, j2] != INSIDE
    if ok1 and ok2:
        t1 = dist[i1, j1]
        t2 = dist[i2, j2]
        d = t1 - t2
        if abs(d) < 1.0:
            r = math.sqrt(2.0 - d * d)
            s = (t1 + t2 - r) * 0.5
            if s >= t1 and s >= t2:
                return s
            s += r
            if s >= t1 and s >= t2:
                return s
        return 1.0 + min(t1, t2)
    if ok1:
        return 1.0 + dist[i1, j1]
    if ok2:
        return 1.0 + dist[i2, j2]
    return _FAR


@numba.njit(cache=True)
def _arrival(i, j, flags, dist):
    return min(
        min(_solve(i - 1, j, i, j - 1, flags, dist), _solve(i + 1, j, i, j + 1, flags, dist)),
        min(_solve(i - 1, j, i, j + 1, flags, dist), _solve(i + 1, j, i, j - 1, flags, dist)),
    )


@numba.njit(cache=True)
def _grad(i, j, flags, dist):
    # one-sided or central differences over non-INSIDE neighbours
    h, w = flags.shape
    t = dist[i, j]
    gx = 0.0
    gy = 0.0
    okp = j + 1 < w and flags[i, j + 1] != INSIDE
    okm = j - 1 >= 0 and flags[i, j - 1] != INSIDE
    if okp and okm:
        gx = (dist[i, j + 1] - dist[i, j - 1]) * 0.5
    elif okp:
        gx = dist[i, j + 1] - t
    elif okm:
        gx = t - dist[i, j - 1]
    okp = i + 1 < h and flags[i + 1, j] != INSIDE
    okm = i - 1 >= 0 and flags[i - 1, j] != INSIDE
    if okp and okm:
        gy = (dist[i + 1, j] - dist[i - 1, j]) * 0.5
    elif okp:
        gy = dist[i + 1, j] - t
    elif okm:
        gy = t - dist[i - 1, j]
    return gx, gy


@numba.njit(cache=True)
def _fill_pixel(i, j, flags, dist, values, radius):
    h, w, c = values.shape
    gx, gy = _grad(i, j, flags, dist)
    acc = np.zeros(c)
    wsum = 0.0
    r2 = radius * radius
    for di in range(-radius, radius + 1):
        ii = i + di
        if ii < 0 or ii >= h:
            continue
        for dj in range(-radius, radius + 1):
            jj = j + dj
            if jj < 0 or jj >= w or (di == 0 and dj == 0):
                continue
            if flags[ii, jj] != KNOWN:
                continue
            d2 = di * di + dj * dj
            if d2 > r2:
                continue
            # vector from the neighbour towards the pixel being filled
            rx = float(-dj)
            ry = float(-di)
            ndist = math.sqrt(d2)
            direction = abs(rx * gx + ry * gy) / ndist
            if direction <= 0.01:
                direction = 1e-6
            dst = 1.0 / d2
            lev = 1.0 / (1.0 + abs(dist[ii, jj] - dist[i, j]))
            wgt = direction * dst * lev
            for k in range(c):
                acc[k] += wgt * values[ii, jj, k]
            wsum += wgt
    if wsum > 0.0:
        for k in range(c):
            values[i, j, k] = acc[k] / wsum
        return True
    return False


@numba.njit(cache=True)
def _march(values, known, radius):
    h, w, c = values.shape
    flags = np.full((h, w), INSIDE, dtype=np.int8)
    dist = np.full((h, w), _FAR)
    filled = np.zeros((h, w), dtype=np.bool_)
    heap = [(0.0, 0)]
    heap.pop()
    for i in range(h):
        for j in range(w):
            if known[i, j]:
                flags[i, j] = KNOWN
                dist[i, j] = 0.0
    for i in range(h):
        for j in range(w):
            if not known[i, j]:
                continue
            border = (
                (i > 0 and not known[i - 1, j])
                or (i + 1 < h and not known[i + 1, j])
                or (j > 0 and not known[i, j - 1])
                or (j + 1 < w and not known[i, j + 1])
            )
            if border:
                heap.append((0.0, i * w + j))
    heapq.heapify(heap)

    di4 = (-1, 0, 0, 1)
    dj4 = (0, -1, 1, 0)
    done = np.zeros((h, w), dtype=np.bool_)
    while len(heap) > 0:
        t, idx = heapq.heappop(heap)
        i = idx // w
        j = idx - i * w
        if done[i, j] or t > dist[i, j]:
            continue
        done[i, j] = True
        flags[i, j] = KNOWN
        for n in range(4):
            ii = i + di4[n]
            jj = j + dj4[n]
            if ii < 0 or ii >= h or jj < 0 or jj >= w or flags[ii, jj] == KNOWN:
                continue
            t_new = _arrival(ii, jj, flags, dist)
            if flags[ii, jj] == INSIDE:
                flags[ii, jj] = BAND
                dist[ii, jj] = t_new
                filled[ii, jj] = _fill_pixel(ii, jj, flags, dist, values, radius)
                heapq.heappush(heap, (t_new, ii * w + jj))
            elif t_new < dist[ii, jj]:
                dist[ii, jj] = t_new
                heapq.heappush(heap, (t_new, ii * w + jj))
    return filled


def inpaint(image: np.ndarray, fill_mask: np.ndarray, radius: int = 3) -> np.ndarray:
    """Fast-marching inpainting of the pixels where ``fill_mask`` is False.

    Unknown pixels are visited in order of increasing distance from the known
    region (ties in row-major order).  Each one becomes the average of the
    already-known pixels within ``radius``, weighted by direction, distance
    and level-set proximity, with one weighting shared by all channels.
    Known pixels are returned untouched and filled values never leave the
    range of the values they were averaged from.
    """
    image = np.asarray(image)
    known = np.asarray(fill_mask, dtype=bool)
    if image.shape[:2] != known.shape:
        raise ValueError(f"mask shape {known.shape} does not match image shape {image.shape[:2]}")
    if radius < 1:
        raise ValueError(f"radius must be >= 1, got {radius}")
    if known.all():
        return image.copy()
    if not known.any():
        raise ValueError("fill mask has no known pixels to propagate from")

    values = image.astype(np.float64).reshape(image.shape[0], image.shape[1], -1)
    values = np.ascontiguousarray(values)
    filled = _march(values, np.ascontiguousarray(known), int(radius))
    if not filled[~known].all():
        # every unknown pixel has a known 4-neighbour when first reached
        raise RuntimeError("inpainting left pixels without known neighbours")

    if np.issubdtype(image.dtype, np.integer):
        info = np.iinfo(image.dtype)
        out = np.clip(np.floor(values + 0.5), info.min, info.max).astype(image.dtype)
    else:
        out = values.astype(image.dtype)
    out = out.reshape(image.shape)
    out[known] = image[known]
    return out
