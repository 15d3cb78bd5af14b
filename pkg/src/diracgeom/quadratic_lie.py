"""Quadratic Lie algebras given by structure constants and an invariant form."""

import json

import numpy as np


class ValidationError(ValueError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or {}


class QuadraticLieAlgebra:
    """Structure constants c[i, j, k] with [e_i, e_j] = sum_k c[i, j, k] e_k,
    and a symmetric nondegenerate ad-invariant form B (not necessarily definite).
    """

    def __init__(self, structure_constants, form, name="custom"):
        c = np.array(structure_constants, dtype=float)
        B = np.array(form, dtype=float)
        if c.ndim != 3 or len(set(c.shape)) != 1:
            raise ValidationError("structure constants must be a d x d x d array")
        if B.shape != c.shape[:2]:
            raise ValidationError("form must be d x d with d = %d" % c.shape[0])
        self.c = c
        self.B = B
        self.name = name
        self.dim = c.shape[0]
        c.setflags(write=False)
        B.setflags(write=False)
        self._Binv = None

    @property
    def Binv(self):
        if self._Binv is None:
            self._Binv = np.linalg.inv(self.B)
        return self._Binv

    def bracket(self, u, v):
        return np.einsum("i,j,ijk->k", u, v, self.c)

    def ad(self, u):
        """Matrix of ad_u: (ad_u)[k, j] = sum_i u_i c[i, j, k]."""
        return np.einsum("i,ijk->kj", u, self.c)

    def ad_matrices(self):
        return np.einsum("ijk->ikj", self.c)

    def pair(self, u, v):
        return u @ self.B @ v

    def __repr__(self):
        return "QuadraticLieAlgebra(%s, dim=%d)" % (self.name, self.dim)


def validate(g, tol=1e-12):
    """Residuals of antisymmetry, Jacobi, symmetry of B, ad-invariance, nondegeneracy."""
    c, B = g.c, g.B
    anti = float(np.max(np.abs(c + c.transpose(1, 0, 2)), initial=0.0))
    # [[e_i,e_j],e_k] + cyclic
    jac = np.einsum("ijm,mkn->ijkn", c, c)
    jac = jac + jac.transpose(1, 2, 0, 3) + jac.transpose(2, 0, 1, 3)
    jacobi = float(np.max(np.abs(jac), initial=0.0))
    sym = float(np.max(np.abs(B - B.T), initial=0.0))
    # <[x,y],z> + <y,[x,z]>
    inv = np.einsum("ijm,mk->ijk", c, B) + np.einsum("ikm,jm->ijk", c, B)
    invariance = float(np.max(np.abs(inv), initial=0.0))
    det = float(np.linalg.det(B)) if g.dim else 1.0
    sv = np.linalg.svd(B, compute_uv=False) if g.dim else np.ones(1)
    nondeg = bool(sv.min() > tol * max(1.0, sv.max()))
    ok = max(anti, jacobi, sym, invariance) <= tol and nondeg
    return {
        "antisymmetry": anti,
        "jacobi": jacobi,
        "symmetry": sym,
        "invariance": invariance,
        "det": det,
        "nondegenerate": nondeg,
        "pass": bool(ok),
    }


class CartanData:
    def __init__(self, phi, chi, dual_basis):
        self.phi = phi
        self.chi = chi
        self.dual_basis = dual_basis


def cartan_data(g):
    """Cartan 3-form phi(u,v,w) = 1/2 <u,[v,w]> and the dual trivector chi."""
    rep = validate(g, tol=1e-9)
    if not rep["nondegenerate"]:
        raise ValidationError("degenerate form", rep)
    phi = 0.5 * np.einsum("ak,bck->abc", g.B, g.c)
    f = g.Binv
    # chi(a, b, c) = phi(B^-1 a, B^-1 b, B^-1 c)
    chi = np.einsum("abc,ai,bj,ck->ijk", phi, f, f, f)
    return CartanData(phi, chi, f)


def _eps():
    e = np.zeros((3, 3, 3))
    for (i, j, k), s in {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1,
                         (1, 0, 2): -1, (0, 2, 1): -1, (2, 1, 0): -1}.items():
        e[i, j, k] = s
    return e


def so3():
    return QuadraticLieAlgebra(_eps(), np.eye(3), "so3")


def su2():
    # basis -i sigma_k / 2 ... in the cross-product normalisation [e_i, e_j] = e_k
    return QuadraticLieAlgebra(_eps(), np.eye(3), "su2")


def sl2r():
    # e1 = diag(1,-1), e2 = [[0,1],[1,0]], e3 = [[0,1],[-1,0]], B(u,v) = tr(uv)
    c = np.zeros((3, 3, 3))
    c[0, 1, 2], c[1, 0, 2] = 2.0, -2.0
    c[0, 2, 1], c[2, 0, 1] = 2.0, -2.0
    c[1, 2, 0], c[2, 1, 0] = -2.0, 2.0
    return QuadraticLieAlgebra(c, np.diag([2.0, 2.0, -2.0]), "sl2r")


def so_n(n):
    """so(n) in the basis E_ij = e_i e_j^T - e_j e_i^T (i < j), form -1/2 tr(uv)."""
    idx = [(i, j) for i in range(n) for j in range(i + 1, n)]
    d = len(idx)
    E = np.zeros((d, n, n))
    for a, (i, j) in enumerate(idx):
        E[a, i, j], E[a, j, i] = 1.0, -1.0
    iu = np.triu_indices(n, 1)
    c = np.zeros((d, d, d))
    for a in range(d):
        for b in range(d):
            c[a, b] = (E[a] @ E[b] - E[b] @ E[a])[iu]
    return QuadraticLieAlgebra(c, np.eye(d), "so%d" % n)


def abelian(n):
    return QuadraticLieAlgebra(np.zeros((n, n, n)), np.eye(n), "abelian(%d)" % n)


def direct_sum(*algebras):
    d = sum(a.dim for a in algebras)
    c = np.zeros((d, d, d))
    B = np.zeros((d, d))
    o = 0
    for a in algebras:
        s = slice(o, o + a.dim)
        c[s, s, s] = a.c
        B[s, s] = a.B
        o += a.dim
    return QuadraticLieAlgebra(c, B, "+".join(a.name for a in algebras))


def builtin(name):
    name = name.strip().lower()
    if name == "so3":
        return so3()
    if name == "su2":
        return su2()
    if name == "sl2r":
        return sl2r()
    if name.startswith("abelian"):
        inner = name[len("abelian"):].strip("()") or "1"
        return abelian(int(inner))
    if name.startswith("so") and name[2:].isdigit():
        return so_n(int(name[2:]))
    if "+" in name:
        return direct_sum(*[builtin(p) for p in name.split("+")])
    raise KeyError("unknown Lie algebra %r" % name)


def save(g):
    return json.dumps({
        "name": g.name,
        "dim": g.dim,
        "structure_constants": g.c.tolist(),
        "form": g.B.tolist(),
    }, sort_keys=True)


def load(text, tol=1e-12):
    try:
        doc = json.loads(text)
        d = int(doc["dim"])
        c = np.array(doc["structure_constants"], dtype=float)
        B = np.array(doc["form"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError("parse error: %s" % exc) from exc
    if c.shape != (d, d, d) or B.shape != (d, d):
        raise ValidationError("shape mismatch with dim=%d" % d)
    g = QuadraticLieAlgebra(c, B, doc.get("name", "custom"))
    rep = validate(g, tol)
    if not rep["pass"]:
        bad = [k for k in ("antisymmetry", "jacobi", "symmetry", "invariance") if rep[k] > tol]
        if not rep["nondegenerate"]:
            bad.append("nondegenerate")
        raise ValidationError("validation failed: " + ", ".join(bad), rep)
    return g
