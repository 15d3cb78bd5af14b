"""Tagged dual numbers over numpy arrays.

Used for exact first derivatives of coefficient functions that are
polynomial in the entries of g, Ad_g and Ad_{g^-1}.  Each derivative
gets its own integer tag, so nested derivatives do not get confused.
Only multilinear operations are supported: +, -, *, @, transpose,
indexing and :func:`ein`.
"""

import itertools

import numpy as np

_tags = itertools.count(1)


def new_tag():
    return next(_tags)


def tag_of(x):
    return x.tag if isinstance(x, Dual) else 0


def _split(x, tag):
    if isinstance(x, Dual) and x.tag == tag:
        return x.re, x.du
    return x, None


class Dual:
    __array_ufunc__ = None

    def __init__(self, re, du, tag):
        self.re = re
        self.du = du
        self.tag = tag

    def _binary(self, other, op, reflected=False):
        t = max(self.tag, tag_of(other))
        a, da = _split(self, t)
        b, db = _split(other, t)
        if reflected:
            a, da, b, db = b, db, a, da
        if op == "add":
            re = a + b
            du = da if db is None else (db if da is None else da + db)
        elif op == "sub":
            re = a - b
            if db is None:
                du = da
            elif da is None:
                du = -db
            else:
                du = da - db
        elif op == "mul":
            re = a * b
            du = _lin(da, b, a, db, lambda x, y: x * y)
        elif op == "matmul":
            re = a @ b
            du = _lin(da, b, a, db, lambda x, y: x @ y)
        else:
            raise ValueError(op)
        return Dual(re, du, t) if du is not None else re

    def __add__(self, o):
        return self._binary(o, "add")

    def __radd__(self, o):
        return self._binary(o, "add", True)

    def __sub__(self, o):
        return self._binary(o, "sub")

    def __rsub__(self, o):
        return self._binary(o, "sub", True)

    def __mul__(self, o):
        return self._binary(o, "mul")

    def __rmul__(self, o):
        return self._binary(o, "mul", True)

    def __matmul__(self, o):
        return self._binary(o, "matmul")

    def __rmatmul__(self, o):
        return self._binary(o, "matmul", True)

    def __truediv__(self, o):
        if isinstance(o, Dual):
            raise TypeError("division by a dual number is not supported")
        return Dual(self.re / o, self.du / o, self.tag)

    def __neg__(self):
        return Dual(-self.re, -self.du, self.tag)

    def __pos__(self):
        return self

    def __getitem__(self, idx):
        return Dual(self.re[idx], self.du[idx], self.tag)

    @property
    def T(self):
        return Dual(self.re.T, self.du.T, self.tag)

    @property
    def shape(self):
        return np.shape(self.re)

    def transpose(self, *axes):
        return Dual(self.re.transpose(*axes), self.du.transpose(*axes), self.tag)

    def reshape(self, *shape):
        return Dual(self.re.reshape(*shape), self.du.reshape(*shape), self.tag)

    def sum(self, axis=None):
        return Dual(self.re.sum(axis=axis), self.du.sum(axis=axis), self.tag)

    def __repr__(self):
        return "Dual(tag=%d, re=%r, du=%r)" % (self.tag, self.re, self.du)


def _lin(da, b, a, db, f):
    if da is None and db is None:
        return None
    if da is None:
        return f(a, db)
    if db is None:
        return f(da, b)
    return f(da, b) + f(a, db)


def ein(spec, *ops):
    """np.einsum that propagates dual parts (einsum is multilinear)."""
    t = max((tag_of(o) for o in ops), default=0)
    if t == 0:
        return np.einsum(spec, *ops)
    parts = [_split(o, t) for o in ops]
    re = ein(spec, *[p[0] for p in parts])
    du = None
    for i, (_, d) in enumerate(parts):
        if d is None:
            continue
        args = [p[0] for p in parts]
        args[i] = d
        term = ein(spec, *args)
        du = term if du is None else du + term
    return Dual(re, du, t)


def stack(items, axis=0):
    """np.stack for lists that may contain duals."""
    t = max((tag_of(o) for o in items), default=0)
    if t == 0:
        return np.stack(items, axis=axis)
    parts = [_split(o, t) for o in items]
    re = stack([p[0] for p in parts], axis)
    du = stack([p[1] if p[1] is not None else _zeros_like(p[0]) for p in parts], axis)
    return Dual(re, du, t)


def _zeros_like(x):
    if isinstance(x, Dual):
        return Dual(_zeros_like(x.re), _zeros_like(x.du), x.tag)
    return np.zeros_like(np.asarray(x, dtype=float))


def block(rows):
    """np.block for nested lists that may contain duals."""
    flat = [x for r in rows for x in r]
    t = max((tag_of(o) for o in flat), default=0)
    if t == 0:
        return np.block(rows)
    re = block([[_split(x, t)[0] for x in r] for r in rows])
    du = block([[(_split(x, t)[1] if _split(x, t)[1] is not None else _zeros_like(_split(x, t)[0]))
                 for x in r] for r in rows])
    return Dual(re, du, t)


def value(x):
    """Strip all dual parts."""
    while isinstance(x, Dual):
        x = x.re
    return x


def derivative_part(x, tag, like):
    """Dual part of ``x`` for ``tag``; zeros shaped like ``like`` if absent."""
    if isinstance(x, Dual) and x.tag == tag:
        return x.du
    return _zeros_like(like)
