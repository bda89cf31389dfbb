"""Random meshes and states for finite-difference checks of the assembly."""

import itertools

import numpy as np

from pfpenalty.fem.assembly import NodalFields
from pfpenalty.fem.mesh import Mesh2D


def jittered_mesh(rng, n=10):
    """``n x n`` cells on the unit square, 2 n^2 triangles, interior nodes shaken."""
    xs = np.linspace(0, 1, n + 1)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    nodes = np.column_stack([X.ravel(), Y.ravel()])
    inner = (nodes > 0).all(axis=1) & (nodes < 1).all(axis=1)
    nodes[inner] += rng.uniform(-0.25, 0.25, (inner.sum(), 2)) / n
    tri = []
    for i, j in itertools.product(range(n), range(n)):
        a, b, c, d = i * (n + 1) + j, (i + 1) * (n + 1) + j, i * (n + 1) + j + 1, (i + 1) * (n + 1) + j + 1
        tri += [(a, b, d), (a, d, c)]
    return Mesh2D(nodes, tri).validate()


def random_state(rng, mesh, gap=0.05):
    """Admissible fields with every penalty point at least ``gap`` from its switch."""
    n = mesh.n_nodes
    u = rng.normal(scale=0.05, size=(n, 2))
    alpha = rng.uniform(0.05, 0.9, n)
    side = rng.choice([-1.0, 1.0], n)
    alpha_prev = alpha + side * rng.uniform(gap, 0.1, n)
    return NodalFields(u, alpha, alpha_prev, rng.uniform(0.0, 0.05, mesh.n_triangles))


def fd_gradient(f, x, h):
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def fd_jacobian(r, x, h):
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((r(x + e) - r(x - e)) / (2 * h))
    return np.column_stack(cols)


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)
