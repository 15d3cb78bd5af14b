"""Matrix Lie groups, right trivializations and invariant-frame calculus.

Tangent vectors at g are written in right coordinates: w in the Lie algebra
stands for the right-invariant field w_r evaluated at g.  Covectors use the
dual coordinates, so pairing is a plain dot product.

Lie algebra elements are identified with right-invariant fields and the
bracket is fixed by ``BRACKET_SIGN``:  [u_r, v_r] = BRACKET_SIGN * [u, v]_r.
To realise this, the group exponential of u is expm(-BRACKET_SIGN * hom(u)),
where hom is the ordinary matrix representation of the algebra.  With this
choice Ad_g is ordinary conjugation, the left field v_l has right
coordinates Ad_g v, and

    d/dt Ad_{exp(tu) g} = -BRACKET_SIGN * ad_u Ad_g.
"""

import contextlib
import threading

import numpy as np
from scipy.linalg import expm

from . import quadratic_lie as ql
from .dual import Dual, derivative_part, new_tag, value

BRACKET_SIGN = 1


def _polar(m):
    u, _, vt = np.linalg.svd(m)
    r = u @ vt
    if np.linalg.det(r) < 0:
        u[:, -1] *= -1
        r = u @ vt
    return r


def hat(u):
    x, y, z = u
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def rot_z(t):
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


class Group:
    """Base class.  Payloads are numpy arrays (or tuples for products)."""

    name = "group"
    algebra = None
    proj_tol = 1e-6

    @property
    def dim(self):
        return self.algebra.dim

    def factors(self):
        return [self]

    def conj(self, g, h):
        return self.mul(self.mul(g, h), self.inv(g))

    def Adinv(self, p):
        return self.Ad(self.inv(p))

    def _checked(self, p):
        r = self.constraint(p)
        if r > self.proj_tol:
            raise ValueError("%s constraint violated by %.3g" % (self.name, r))
        return self.project(p)


class SO3(Group):
    name = "so3"

    def __init__(self):
        self.algebra = ql.so3()

    def identity(self):
        return np.eye(3)

    def hom(self, u):
        return hat(u)

    def mul(self, p, q):
        return self._checked(p @ q)

    def inv(self, p):
        return p.T.copy()

    def exp(self, u):
        return self.project(expm(-BRACKET_SIGN * hat(np.asarray(u, float))))

    def Ad(self, p):
        return np.array(p, dtype=float)

    def constraint(self, p):
        return max(float(np.max(np.abs(p.T @ p - np.eye(3)))), abs(np.linalg.det(p) - 1.0))

    def project(self, p):
        return _polar(p)

    def tangent(self, p, v):
        return -BRACKET_SIGN * hat(v) @ p


def quat_mul(p, q):
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return np.array([
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ])


def quat_left(p):
    """Matrix of q -> p q."""
    a, b, c, d = p
    return np.array([[a, -b, -c, -d], [b, a, -d, c], [c, d, a, -b], [d, -c, b, a]])


def quat_to_rot(q):
    a, b, c, d = q
    return np.array([
        [a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c)],
        [2 * (b * c + a * d), a * a - b * b + c * c - d * d, 2 * (c * d - a * b)],
        [2 * (b * d - a * c), 2 * (c * d + a * b), a * a - b * b - c * c + d * d],
    ])


class SU2(Group):
    """Unit quaternions; hom(u) is the pure quaternion u/2."""

    name = "su2"

    def __init__(self):
        self.algebra = ql.su2()

    def identity(self):
        return np.array([1.0, 0.0, 0.0, 0.0])

    def hom(self, u):
        return np.concatenate([[0.0], 0.5 * np.asarray(u, float)])

    def mul(self, p, q):
        return self._checked(quat_mul(p, q))

    def inv(self, p):
        return p * np.array([1.0, -1.0, -1.0, -1.0])

    def exp(self, u):
        u = -BRACKET_SIGN * np.asarray(u, float)
        t = np.linalg.norm(u)
        if t < 1e-300:
            return self.identity()
        return self.project(np.concatenate([[np.cos(t / 2)], np.sin(t / 2) * u / t]))

    def Ad(self, p):
        return quat_to_rot(p)

    def constraint(self, p):
        return abs(float(p @ p) - 1.0)

    def project(self, p):
        return p / np.linalg.norm(p)

    def tangent(self, p, v):
        return quat_left(-BRACKET_SIGN * self.hom(v)) @ p


SL2_BASIS = np.array([
    [[1.0, 0.0], [0.0, -1.0]],
    [[0.0, 1.0], [1.0, 0.0]],
    [[0.0, 1.0], [-1.0, 0.0]],
])


class SL2R(Group):
    name = "sl2r"

    def __init__(self):
        self.algebra = ql.sl2r()

    def identity(self):
        return np.eye(2)

    def hom(self, u):
        return np.einsum("i,ijk->jk", np.asarray(u, float), SL2_BASIS)

    def coords(self, X):
        return self.algebra.Binv @ np.einsum("ijk,kj->i", SL2_BASIS, X)

    def mul(self, p, q):
        return self._checked(p @ q)

    def inv(self, p):
        return np.array([[p[1, 1], -p[0, 1]], [-p[1, 0], p[0, 0]]])

    def exp(self, u):
        return self.project(expm(-BRACKET_SIGN * self.hom(u)))

    def Ad(self, p):
        pi = self.inv(p)
        return np.stack([self.coords(p @ E @ pi) for E in SL2_BASIS], axis=1)

    def constraint(self, p):
        return abs(np.linalg.det(p) - 1.0)

    def project(self, p):
        return p / np.sqrt(np.linalg.det(p))

    def tangent(self, p, v):
        return -BRACKET_SIGN * self.hom(v) @ p


def so_basis(n):
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            E = np.zeros((n, n))
            E[i, j], E[j, i] = 1.0, -1.0
            out.append(E)
    return np.array(out)


class SOn(Group):
    """SO(n) with basis E_ij (i < j) and the form -1/2 tr(uv)."""

    def __init__(self, n):
        self.n = n
        self.basis = so_basis(n)
        self.iu = np.triu_indices(n, 1)
        self.algebra = ql.so_n(n)
        self.name = "so%d" % n

    def identity(self):
        return np.eye(self.n)

    def hom(self, u):
        return np.einsum("i,ijk->jk", np.asarray(u, float), self.basis)

    def coords(self, X):
        return X[self.iu]

    def mul(self, p, q):
        return self._checked(p @ q)

    def inv(self, p):
        return p.T.copy()

    def exp(self, u):
        return self.project(expm(-BRACKET_SIGN * self.hom(u)))

    def Ad(self, p):
        return np.stack([self.coords(p @ E @ p.T) for E in self.basis], axis=1)

    def constraint(self, p):
        return max(float(np.max(np.abs(p.T @ p - np.eye(self.n)))), abs(np.linalg.det(p) - 1.0))

    def project(self, p):
        return _polar(p)

    def tangent(self, p, v):
        return -BRACKET_SIGN * self.hom(v) @ p


class Abelian(Group):
    """The vector group R^n; exp(u) = u."""

    def __init__(self, n):
        self.algebra = ql.abelian(n)
        self.name = "abelian(%d)" % n
        self.n = n

    def identity(self):
        return np.zeros(self.n)

    def hom(self, u):
        return np.asarray(u, float)

    def mul(self, p, q):
        return p + q

    def inv(self, p):
        return -p

    def exp(self, u):
        return np.array(u, dtype=float)

    def Ad(self, p):
        return np.eye(self.n)

    def constraint(self, p):
        return 0.0

    def project(self, p):
        return p

    def tangent(self, p, v):
        return np.asarray(v, float) + 0.0 * p


class Product(Group):
    """Direct product; payloads are tuples, Ad is block diagonal."""

    def __init__(self, *groups):
        self.groups = groups
        self.algebra = ql.direct_sum(*[g.algebra for g in groups])
        self.name = "*".join(g.name for g in groups)
        self.offsets = np.cumsum([0] + [g.dim for g in groups])

    def factors(self):
        return [f for g in self.groups for f in g.factors()]

    def split(self, u):
        return [np.asarray(u)[self.offsets[i]:self.offsets[i + 1]] for i in range(len(self.groups))]

    def identity(self):
        return tuple(g.identity() for g in self.groups)

    def mul(self, p, q):
        return tuple(g.mul(a, b) for g, a, b in zip(self.groups, p, q))

    def inv(self, p):
        return tuple(g.inv(a) for g, a in zip(self.groups, p))

    def exp(self, u):
        return tuple(g.exp(a) for g, a in zip(self.groups, self.split(u)))

    def Ad(self, p):
        from scipy.linalg import block_diag
        return block_diag(*[g.Ad(a) for g, a in zip(self.groups, p)])

    def constraint(self, p):
        return max(g.constraint(a) for g, a in zip(self.groups, p))

    def project(self, p):
        return tuple(g.project(a) for g, a in zip(self.groups, p))

    def hom(self, u):
        raise NotImplementedError("products have no single matrix representation")

    def tangent(self, p, v):
        return tuple(g.tangent(a, b) for g, a, b in zip(self.groups, p, self.split(v)))


_GROUPS = {"so3": SO3, "su2": SU2, "sl2r": SL2R}


def make_group(name):
    name = name.strip().lower()
    if name not in _MADE:
        _MADE[name] = _make_group(name)
    return _MADE[name]


_MADE = {}


def _make_group(name):
    if name in _GROUPS:
        return _GROUPS[name]()
    if name.startswith("abelian"):
        inner = name[len("abelian"):].strip("()") or "1"
        return Abelian(int(inner))
    if name.startswith("so") and name[2:].isdigit():
        return SOn(int(name[2:]))
    if "*" in name:
        return Product(*[make_group(p) for p in name.split("*")])
    raise KeyError("unknown group %r" % name)


class GroupPoint:
    def __init__(self, group, payload, check=True):
        self.group = group
        if check and group.constraint(payload) > 1e-10:
            payload = group._checked(payload)
        self.payload = payload

    @classmethod
    def identity(cls, group):
        return cls(group, group.identity())

    @classmethod
    def exp(cls, group, u):
        return cls(group, group.exp(u))

    def __mul__(self, other):
        return GroupPoint(self.group, self.group.mul(self.payload, other.payload))

    def inv(self):
        return GroupPoint(self.group, self.group.inv(self.payload))

    def conj(self, h):
        """g h g^-1"""
        return GroupPoint(self.group, self.group.conj(self.payload, h.payload))

    def Ad(self):
        return self.group.Ad(self.payload)

    def Adinv(self):
        return self.group.Adinv(self.payload)

    @property
    def dim(self):
        return self.group.dim

    @property
    def algebra(self):
        return self.group.algebra

    def constraint(self):
        return self.group.constraint(self.payload)

    def tolist(self):
        p = self.payload
        if isinstance(p, tuple):
            return [np.asarray(a).tolist() for a in p]
        return np.asarray(p).tolist()

    def __repr__(self):
        return "GroupPoint(%s, %r)" % (self.group.name, self.payload)


def point_from_list(group, data):
    if isinstance(group, Product):
        return GroupPoint(group, tuple(np.array(a, dtype=float) for a in data))
    return GroupPoint(group, np.array(data, dtype=float))


def sample_point(rng, group):
    d = group.dim
    u1 = rng.uniform(-1.0, 1.0, d)
    u2 = rng.uniform(-1.0, 1.0, d)
    return GroupPoint.exp(group, u1) * GroupPoint.exp(group, u2)


# ---------------------------------------------------------------------------
# coefficient functions

_C_CACHE = {}


class At:
    """Evaluation context handed to coefficient functions.

    Holds, for each factor of a (product of) group(s), the payload, Ad and
    Ad^{-1}.  Entries may be dual numbers while an exact derivative is taken.
    """

    def __init__(self, groups, payloads, A, Ai, points=None):
        self.groups = list(groups)
        self.payloads = list(payloads)
        self.As = list(A)
        self.Ais = list(Ai)
        self.points = points

    @classmethod
    def of(cls, *points):
        groups, payloads, A, Ai = [], [], [], []
        for p in points:
            if isinstance(p.group, Product):
                for g, a in zip(p.group.groups, p.payload):
                    groups.append(g)
                    payloads.append(a)
                    A.append(g.Ad(a))
                    Ai.append(g.Adinv(a))
            else:
                groups.append(p.group)
                payloads.append(p.payload)
                A.append(p.Ad())
                Ai.append(p.Adinv())
        return cls(groups, payloads, A, Ai, points)

    @property
    def A(self):
        return self.As[0]

    @property
    def Ai(self):
        return self.Ais[0]

    @property
    def g(self):
        return self.payloads[0]

    @property
    def dim(self):
        return sum(g.dim for g in self.groups)

    @property
    def C(self):
        """Frame structure constants of the product algebra."""
        key = tuple(id(g) for g in self.groups)
        # the groups are stored with the entry so their ids stay unique
        if key not in _C_CACHE:
            _C_CACHE[key] = (tuple(self.groups),
                             BRACKET_SIGN * ql.direct_sum(*[g.algebra for g in self.groups]).c)
        return _C_CACHE[key][1]

    def splits(self, v):
        out, o = [], 0
        for g in self.groups:
            out.append(np.asarray(v)[o:o + g.dim])
            o += g.dim
        return out

    def moved(self, v, h):
        """Numeric context at exp(h v) g (factorwise)."""
        if self.points is None:
            raise ValueError("finite differences need a numeric point")
        pts, vs, o = [], np.asarray(v, float), 0
        for p in self.points:
            d = p.dim
            pts.append(GroupPoint.exp(p.group, h * vs[o:o + d]) * p)
            o += d
        return At.of(*pts)


def as_at(x):
    if isinstance(x, At):
        return x
    if isinstance(x, GroupPoint):
        return At.of(x)
    if isinstance(x, (tuple, list)):
        return At.of(*x)
    raise TypeError("expected a GroupPoint or At, got %r" % type(x))


class Coeffs:
    """Right-frame components of a tensor field.

    kind is 'constant', 'ad_polynomial' (multilinear in the entries of Ad,
    Ad^{-1} and the payload, so exact dual-number derivatives apply) or
    'generic' (finite differences).
    """

    KINDS = ("constant", "ad_polynomial", "generic")

    def __init__(self, fn, kind="ad_polynomial", name=""):
        if kind not in self.KINDS:
            raise ValueError("unknown coefficient kind %r" % kind)
        self.fn = fn
        self.kind = kind
        self.name = name

    def __call__(self, at):
        return self.fn(as_at(at))

    @classmethod
    def const(cls, arr, name=""):
        arr = np.asarray(arr, dtype=float)
        return cls(lambda at: arr, "constant", name)


def join_kind(*cs):
    order = {"constant": 0, "ad_polynomial": 1, "generic": 2}
    k = max(order[c.kind] for c in cs)
    return Coeffs.KINDS[k]


def _perturb(at, v, tag):
    A, Ai, P = [], [], []
    for g, a, ai, p, vi in zip(at.groups, at.As, at.Ais, at.payloads, at.splits(v)):
        adv = g.algebra.ad(vi)
        A.append(Dual(a, -BRACKET_SIGN * (adv @ a), tag))
        Ai.append(Dual(ai, BRACKET_SIGN * (ai @ adv), tag))
        if isinstance(p, Dual):
            dp = g.tangent(p, vi)
        else:
            dp = g.tangent(np.asarray(p), vi)
        P.append(Dual(p, dp, tag))
    return At(at.groups, P, A, Ai, None)


_FD = threading.local()
DEFAULT_STEP = 1e-5


def fd_step():
    return getattr(_FD, "step", DEFAULT_STEP)


@contextlib.contextmanager
def step_size(h):
    """Default central-difference step inside the block (this thread only).

    Nested finite differences (brackets of brackets) lose about eps / h^2, so
    they want h near 1e-4 rather than the single-level default 1e-5.
    """
    old = fd_step()
    _FD.step = h
    try:
        yield
    finally:
        _FD.step = old


def derive(c, at, v, method="auto", h=None):
    """Derivative of c along t -> exp(t v) g at t = 0."""
    at = as_at(at)
    if h is None:
        h = fd_step()
    v = np.asarray(v, dtype=float)
    if method == "auto":
        method = {"constant": "zero", "ad_polynomial": "exact", "generic": "fd"}[c.kind]
    if method == "zero":
        return derivative_part(None, -1, c(at))
    if method == "exact":
        if c.kind == "generic":
            raise ValueError("exact derivative requested for generic coefficients")
        tag = new_tag()
        res = c(_perturb(at, v, tag))
        return derivative_part(res, tag, value(res))
    if method == "fd":
        return (c(at.moved(v, h)) - c(at.moved(v, -h))) / (2 * h)
    raise ValueError("unknown method %r" % method)


def derive_frame(c, at, method="auto", h=None):
    """Stack of derivatives along every basis direction; new leading axis."""
    at = as_at(at)
    d = at.dim
    eye = np.eye(d)
    out = [derive(c, at, eye[a], method, h) for a in range(d)]
    if any(isinstance(o, Dual) for o in out):
        from .dual import stack
        return stack(out, 0)
    return np.stack(out, 0)


def lie_bracket_fields(X, Y, method="auto", h=None):
    """[X, Y]^k = X(Y^k) - Y(X^k) + X^a Y^b C_ab^k  in the right frame."""

    def fn(at):
        x, y = X(at), Y(at)
        DX = derive_frame(X, at, method, h)
        DY = derive_frame(Y, at, method, h)
        return _ein("a,ak->k", x, DY) - _ein("a,ak->k", y, DX) + _ein("a,b,abk->k", x, y, at.C)

    return Coeffs(fn, join_kind(X, Y), "[%s,%s]" % (X.name, Y.name))


def _ein(spec, *ops):
    from .dual import ein
    return ein(spec, *ops)


def fundamental_field(u):
    """u_G = u_r - u_l, right coordinates (I - Ad_g) u."""
    u = np.asarray(u, dtype=float)
    return Coeffs(lambda at: u - at.A @ u, "ad_polynomial", "fund")


def left_field(u):
    u = np.asarray(u, dtype=float)
    return Coeffs(lambda at: at.A @ u, "ad_polynomial", "left")


def derive_along(c, at, X, method="auto", h=None):
    """Derivative of c along the vector field with right components X (array)."""
    D = derive_frame(c, at, method, h)
    return _ein("a,a...->...", np.asarray(value(X)) if not isinstance(X, Dual) else X, D)


def exterior_derivative(omega, at, vectors, method="auto", h=None):
    """d omega (v_0, ..., v_k) for a k-form given by right-frame components and
    constant right-frame vectors v_i (k <= 3)."""
    at = as_at(at)
    vs = [np.asarray(v, dtype=float) for v in vectors]
    k = len(vs) - 1
    if k < 0 or k > 3:
        raise ValueError("degree out of range")
    C = value(at.C)

    def ev(T, args):
        out = T
        for a in args:
            out = np.tensordot(out, a, axes=([0], [0])) if np.ndim(out) else out
        return out

    total = 0.0
    for i in range(k + 1):
        rest = vs[:i] + vs[i + 1:]
        total += (-1) ** i * ev(value(derive(omega, at, vs[i], method, h)), rest)
    w = value(omega(at))
    for i in range(k + 1):
        for j in range(i + 1, k + 1):
            br = np.einsum("a,b,abk->k", vs[i], vs[j], C)
            rest = [vs[m] for m in range(k + 1) if m not in (i, j)]
            total += (-1) ** (i + j) * ev(w, [br] + rest)
    return float(total)


def exterior_derivative_tensor(omega, at, method="auto", h=None):
    """All components of d omega in the right frame, alternating (k+1)-tensor."""
    at = as_at(at)
    w = value(omega(at))
    k = np.ndim(w)
    d = at.dim
    eye = np.eye(d)
    out = np.zeros((d,) * (k + 1))
    import itertools
    D = [value(derive(omega, at, eye[a], method, h)) for a in range(d)]
    C = value(at.C)
    for idx in itertools.product(range(d), repeat=k + 1):
        if len(set(idx)) < k + 1:
            continue
        s = 0.0
        for i in range(k + 1):
            rest = idx[:i] + idx[i + 1:]
            s += (-1) ** i * D[idx[i]][rest]
        for i in range(k + 1):
            for j in range(i + 1, k + 1):
                rest = tuple(idx[m] for m in range(k + 1) if m not in (i, j))
                br = C[idx[i], idx[j]]
                s += (-1) ** (i + j) * np.tensordot(br, w, axes=([0], [0]))[rest]
        out[idx] = s
    return out


def schouten_square(pi, at, method="auto", h=None):
    """tri_pi = [pi, pi] in the right frame, P[i, j] = pi(e^i, e^j).

    Uses  1/2 tri^{xyz} = cyc_{xyz} ( P^{xb} D_b P^{yz} + P^{xb} P^{yd} C_bd^z ).
    """
    at = as_at(at)
    P = value(pi(at))
    D = value(derive_frame(pi, at, method, h))
    C = value(at.C)
    T = np.einsum("xb,byz->xyz", P, D) + np.einsum("xb,yd,bdz->xyz", P, P, C)
    half = T + T.transpose(1, 2, 0) + T.transpose(2, 0, 1)
    return 2.0 * half


def conjugacy_tangent(point, tol=1e-9):
    """Right-coordinate span of the fundamental fields u_G = u_r - u_l."""
    from .dirac_linear import Subspace
    A = point.Ad()
    return Subspace.span(np.eye(point.dim) - A, tol)


def trivialize(point, x, kind="vector", direction="left_to_right"):
    """Convert between left and right coordinates at g.

    Vectors: right = Ad_g left.  Covectors: right = Ad_g^{-T} left.
    """
    A = point.Ad()
    x = np.asarray(x, dtype=float)
    if kind == "vector":
        if direction == "left_to_right":
            return A @ x
        return np.linalg.solve(A, x)
    if kind == "covector":
        if direction == "left_to_right":
            return np.linalg.solve(A.T, x)
        return A.T @ x
    raise ValueError(kind)
