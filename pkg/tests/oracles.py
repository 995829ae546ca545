"""Independent brute-force homology oracle used only by the tests.

Works on the face closure of a 2D cell mask drawn on a fine pixel
canvas: each unit cell becomes a 2x2 pixel block plus shared boundary
pixels, so the canvas is the actual point set of the closed cubical
set.  beta_0 is 8-connected flood fill on the canvas (closed sets touch
through corners); beta_1 counts bounded complement regions by
4-connected flood fill from the canvas border (open complement does not
pass through corners).
"""

from collections import deque

import numpy as np


def rasterize(cells: np.ndarray) -> np.ndarray:
    """Paint each unit cell as a 3x3 pixel block on a (2n+1)^2 canvas."""
    cells = np.asarray(cells, dtype=bool)
    n0, n1 = cells.shape
    canvas = np.zeros((2 * n0 + 1, 2 * n1 + 1), dtype=bool)
    for i in range(n0):
        for j in range(n1):
            if cells[i, j]:
                canvas[2 * i : 2 * i + 3, 2 * j : 2 * j + 3] = True
    return canvas


def _flood_count(mask: np.ndarray, diagonal: bool) -> int:
    seen = np.zeros_like(mask)
    if diagonal:
        steps = [(di, dj) for di in (-1, 0, 1) for dj in (-1, 0, 1)
                 if (di, dj) != (0, 0)]
    else:
        steps = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    count = 0
    for i in range(mask.shape[0]):
        for j in range(mask.shape[1]):
            if mask[i, j] and not seen[i, j]:
                count += 1
                queue = deque([(i, j)])
                seen[i, j] = True
                while queue:
                    a, b = queue.popleft()
                    for di, dj in steps:
                        x, y = a + di, b + dj
                        if (0 <= x < mask.shape[0] and 0 <= y < mask.shape[1]
                                and mask[x, y] and not seen[x, y]):
                            seen[x, y] = True
                            queue.append((x, y))
    return count


def betti_bruteforce(cells: np.ndarray) -> tuple:
    """(beta_0, beta_1) of the closed union of unit cells, by flood fill."""
    canvas = rasterize(cells)
    if not canvas.any():
        return 0, 0
    b0 = _flood_count(canvas, diagonal=True)
    # bounded complement regions: flood the complement, subtract the one
    # region touching the border
    comp = ~np.pad(canvas, 1)
    total = _flood_count(comp, diagonal=False)
    return b0, total - 1
