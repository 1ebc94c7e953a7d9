"""Scalar reference implementations used as independent test oracles.

Deliberately naive: plain Python loops and ``math``, no shared code with the
package beyond the input data.
"""

import math


def matmul3(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3)] for i in range(3)]


def euler_rotation(rx, ry, rz):
    """Rz @ Ry @ Rx, element by element."""
    rot_x = [[1, 0, 0], [0, math.cos(rx), -math.sin(rx)], [0, math.sin(rx), math.cos(rx)]]
    rot_y = [[math.cos(ry), 0, math.sin(ry)], [0, 1, 0], [-math.sin(ry), 0, math.cos(ry)]]
    rot_z = [[math.cos(rz), -math.sin(rz), 0], [math.sin(rz), math.cos(rz), 0], [0, 0, 1]]
    return matmul3(rot_z, matmul3(rot_y, rot_x))


def reproject_pixel(u, v, d, fx, fy, cx, cy, R, t):
    """Return (flow_u, flow_v, z_after) for a single pixel via K T D K^-1 p."""
    kinv = [[1 / fx, 0, -cx / fx], [0, 1 / fy, -cy / fy], [0, 0, 1]]
    ray = [kinv[i][0] * u + kinv[i][1] * v + kinv[i][2] for i in range(3)]
    X = [d * r for r in ray]
    Xp = [R[i][0] * X[0] + R[i][1] * X[1] + R[i][2] * X[2] + t[i] for i in range(3)]
    z = Xp[2]
    if z <= 1e-6:
        return 0.0, 0.0, z
    px = fx * Xp[0] / z + cx
    py = fy * Xp[1] / z + cy
    return px - u, py - v, z


def composite_flow(depth, fx, fy, cx, cy, motions, labels=None):
    """``motions`` maps label -> (R, t); label 0 is the background."""
    h, w = len(depth), len(depth[0])
    flow, zs, valid = [], [], []
    for v in range(h):
        frow, zrow, vrow = [], [], []
        for u in range(w):
            lab = labels[v][u] if labels is not None else 0
            R, t = motions[lab]
            fu, fv, z = reproject_pixel(u, v, depth[v][u], fx, fy, cx, cy, R, t)
            frow.append((fu, fv))
            zrow.append(z)
            vrow.append(z > 1e-6)
        flow.append(frow)
        zs.append(zrow)
        valid.append(vrow)
    return flow, zs, valid


def _round_half_away(x):
    return math.copysign(math.floor(abs(x) + 0.5), x)


def splat(image, flow, valid, z):
    """Brute-force forward splat; returns (image1, counts, zbuffer, winner)."""
    h, w = len(flow), len(flow[0])
    hits = {}
    for v in range(h):
        for u in range(w):
            if not valid[v][u]:
                continue
            tx = int(_round_half_away(u + flow[v][u][0]))
            ty = int(_round_half_away(v + flow[v][u][1]))
            if 0 <= tx < w and 0 <= ty < h:
                hits.setdefault((ty, tx), []).append((z[v][u], v * w + u))
    counts = [[0] * w for _ in range(h)]
    zbuf = [[math.inf] * w for _ in range(h)]
    winner = [[-1] * w for _ in range(h)]
    image1 = [[None] * w for _ in range(h)]
    for (ty, tx), lst in hits.items():
        counts[ty][tx] = len(lst)
        best_z, best_i = min(lst)
        zbuf[ty][tx] = best_z
        winner[ty][tx] = best_i
        image1[ty][tx] = image[best_i // w][best_i % w]
    return image1, counts, zbuf, winner


def dilate(mask, k):
    h, w = len(mask), len(mask[0])
    r = k // 2
    out = [[False] * w for _ in range(h)]
    for y in range(h):
        for x in range(w):
            for dy in range(-r, r + 1):
                for dx in range(-r, r + 1):
                    yy, xx = y + dy, x + dx
                    if 0 <= yy < h and 0 <= xx < w and mask[yy][xx]:
                        out[y][x] = True
    return out


def bilateral(depth, k, sigma_s, sigma_v):
    """One pass of the truncated-border bilateral filter."""
    h, w = len(depth), len(depth[0])
    r = k // 2
    out = [[0.0] * w for _ in range(h)]
    for y in range(h):
        for x in range(w):
            num = den = 0.0
            for dy in range(-r, r + 1):
                for dx in range(-r, r + 1):
                    yy, xx = y + dy, x + dx
                    if not (0 <= yy < h and 0 <= xx < w):
                        continue
                    dz = depth[yy][xx] - depth[y][x]
                    wgt = math.exp(-(dx * dx + dy * dy) / (2 * sigma_s**2)) * math.exp(-dz * dz / (2 * sigma_v**2))
                    num += wgt * depth[yy][xx]
                    den += wgt
            out[y][x] = num / den
    return out
