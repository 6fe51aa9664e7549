"""Assembly of the coupled five-field linear system.

The unknown vector concatenates (u | e | s | lambda | mu).  The default
sign convention negates the two multiplier equations, which makes the
primal-primal and dual-dual diagonal blocks symmetric and the coupling
blocks skew (K[primal, dual] = -K[dual, primal]^T); a flag exposes the
symmetric-indefinite variant with the multiplier rows unnegated.

Stabilized terms follow the augmented saddle-point functional: compatible
and data-misfit squares weighted by alpha/gamma/eta, and elementwise
residual squares of the two balance equations weighted by theta/beta and
squared length scales.  The auxiliary verification source enters both the
potential equation load and the multiplier-balance misfit so the method
stays consistent with source-augmented manufactured solutions.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import elements
from .elements import build_space, quadrature, gauss_legendre_01
from .mesh import mesh_size

FIELD_NAMES = ("u", "e", "s", "lam", "mu")
FORMULATION_KINDS = ("natural", "eo_unstab", "eo_min", "eo_full")

_CONFLICT_TOL = 1e-12


# ----------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class LengthScale:
    """Stabilization length scale: per-element diameter, global mesh
    size, or a fixed value."""

    mode: str                   # "per_element_hK" | "global_h" | "fixed"
    value: float = 0.0

    _MODES = ("per_element_hK", "global_h", "fixed")

    def __post_init__(self):
        if self.mode not in self._MODES:
            raise ValueError(f"unknown length-scale mode {self.mode!r}")
        if self.mode == "fixed" and self.value < 0.0:
            raise ValueError("fixed length scale must be >= 0")

    @classmethod
    def per_element(cls):
        return cls("per_element_hK")

    @classmethod
    def global_mesh(cls):
        return cls("global_h")

    @classmethod
    def fixed(cls, value):
        return cls("fixed", float(value))


@dataclass(frozen=True)
class StabilizationParams:
    """Coefficients of the augmented functional.

    gamma and eta must stay below one so the gradient and flux misfit
    keep positive weights (1 - gamma), (1 - eta); alpha must not exceed
    1/4 or the potential-gradient coercivity term alpha - 4 alpha^2
    turns negative.
    """

    alpha: float = 0.0
    gamma: float = 0.0
    eta: float = 0.0
    theta: float = 0.0
    beta: float = 0.0
    ell_s: LengthScale = field(default_factory=LengthScale.per_element)
    ell_mu: LengthScale = field(default_factory=LengthScale.per_element)

    def __post_init__(self):
        for name in ("alpha", "gamma", "eta", "theta", "beta"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")
        if self.gamma >= 1.0:
            raise ValueError(f"gamma must be < 1, got {self.gamma}")
        if self.eta >= 1.0:
            raise ValueError(f"eta must be < 1, got {self.eta}")
        if self.alpha > 0.25:
            raise ValueError(f"alpha must be <= 1/4, got {self.alpha}")

    @classmethod
    def none(cls):
        return cls()

    @classmethod
    def minimal(cls):
        return cls(alpha=0.125, eta=0.5)

    @classmethod
    def full(cls):
        return cls(alpha=0.125, gamma=0.125, eta=0.5, theta=0.5, beta=0.5)


def stabilization_lengths(mesh, params):
    """Per-element length scales (ell_s, ell_mu)."""

    def expand(scale):
        if scale.mode == "per_element_hK":
            return np.array(mesh.diameters)
        if scale.mode == "global_h":
            return np.full(mesh.n_triangles, mesh_size(mesh))
        return np.full(mesh.n_triangles, scale.value)

    return expand(params.ell_s), expand(params.ell_mu)


@dataclass(frozen=True)
class Formulation:
    """Choice of discrete spaces plus default stabilization.

    natural    : scalars CG_{k+1}, vectors DG_k; no stabilization needed.
    eo_unstab  : everything CG_{k+1}; all coefficients zero.
    eo_min     : eo spaces with alpha = 1/8, eta = 1/2.
    eo_full    : eo spaces with all coefficients on and length scales
                 tied to the element size.
    """

    kind: str
    k: int = 0

    def __post_init__(self):
        if self.kind not in FORMULATION_KINDS:
            raise ValueError(f"unknown formulation kind {self.kind!r}")
        if self.k not in (0, 1, 2):
            raise ValueError(f"degree parameter k must be 0, 1 or 2, "
                             f"got {self.k}")

    def params(self):
        if self.kind == "eo_min":
            return StabilizationParams.minimal()
        if self.kind == "eo_full":
            return StabilizationParams.full()
        return StabilizationParams.none()

    def build_spaces(self, mesh):
        scalar = build_space(mesh, "CG", self.k + 1, "scalar")
        if self.kind == "natural":
            vector = build_space(mesh, "DG", self.k, "vector2")
        else:
            vector = build_space(mesh, "CG", self.k + 1, "vector2")
        return SpaceSet(mesh=mesh, u=scalar, e=vector, s=vector,
                        lam=scalar, mu=vector)


@dataclass
class SpaceSet:
    """The five per-field spaces (u and lambda share one object, as do
    the three vector fields)."""

    mesh: object
    u: object
    e: object
    s: object
    lam: object
    mu: object

    def by_name(self, name):
        return getattr(self, name)

    def offsets(self):
        off = {}
        start = 0
        for name in FIELD_NAMES:
            off[name] = start
            start += self.by_name(name).n_dofs
        return off, start

    def max_degree(self):
        return max(self.by_name(n).degree for n in FIELD_NAMES)


# ----------------------------------------------------------------------
# problem data


class ElementField:
    """Elementwise-constant scalar or 2-vector field over a mesh."""

    def __init__(self, mesh, values):
        values = np.asarray(values, dtype=float)
        if len(values) != mesh.n_triangles:
            raise ValueError("one value per mesh element required")
        if values.ndim not in (1, 2) or (values.ndim == 2
                                         and values.shape[1] != 2):
            raise ValueError("values must have shape (nt,) or (nt, 2)")
        self.mesh = mesh
        self.values = values


@dataclass
class ProblemData:
    """Coefficients, sources, data fields and boundary conditions.

    ``dirichlet`` maps a boundary tag to a pair of callables
    (g_u(x, y), g_lambda(x, y)); ``neumann`` maps a tag to normal-trace
    callables (g_s(x, y, nx, ny), g_mu(x, y, nx, ny)).  Scalar and
    vector fields may be vectorized callables, constants, or
    ``ElementField`` objects (element-constant data).
    """

    kappa: float = 1.0
    zeta: object = 1.0
    q: object = 0.0
    f: object = 0.0
    e_data: object = 0.0
    s_data: object = 0.0
    dirichlet: dict = field(default_factory=dict)
    neumann: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.kappa > 0.0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        both = set(self.dirichlet) & set(self.neumann)
        if both:
            raise ValueError(
                f"boundary tag(s) {sorted(both)} assigned both Dirichlet "
                "and Neumann conditions")

    def check_tags(self, mesh):
        present = set(mesh.boundary_tags)
        covered = set(self.dirichlet) | set(self.neumann)
        missing = present - covered
        if missing:
            raise ValueError(
                f"boundary tag(s) {sorted(missing)} lack boundary data")


def _scalar_at(fld, x, y):
    """Field values at physical points; None if identically zero."""
    if fld is None:
        return None
    if isinstance(fld, ElementField):
        return np.broadcast_to(fld.values[:, None], x.shape)
    if isinstance(fld, (int, float)):
        if fld == 0.0:
            return None
        return np.full(x.shape, float(fld))
    return np.broadcast_to(np.asarray(fld(x, y), dtype=float), x.shape)


def _vector_at(fld, x, y):
    if fld is None:
        return None
    if isinstance(fld, ElementField):
        return np.broadcast_to(fld.values[:, None, :], x.shape + (2,))
    if isinstance(fld, (int, float)):
        if fld == 0.0:
            return None
        return np.full(x.shape + (2,), float(fld))
    return np.broadcast_to(np.asarray(fld(x, y), dtype=float),
                           x.shape + (2,))


# ----------------------------------------------------------------------
# block system


@dataclass
class BlockSystem:
    """Sparse matrix and load vector over the concatenated dof vector."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    offsets: dict
    n_dofs: int
    spaces: SpaceSet
    symmetric_variant: bool = False
    constrained: dict = field(default_factory=dict)

    def field_slice(self, name):
        start = self.offsets[name]
        return slice(start, start + self.spaces.by_name(name).n_dofs)

    def block(self, row_name, col_name):
        return self.matrix[self.field_slice(row_name),
                           self.field_slice(col_name)]

    def split(self, vector):
        """Slice a full dof vector into per-field coefficient arrays."""
        return {name: np.asarray(vector[self.field_slice(name)])
                for name in FIELD_NAMES}


# ----------------------------------------------------------------------
# assembly


class _Tabulation:
    """Shared per-quadrature-point arrays for one space set."""

    def __init__(self, spaces, rule):
        mesh = spaces.mesh
        self.rule = rule
        w = rule.weights
        det = mesh.jacobian_dets
        self.W = det[:, None] * w[None, :]                    # (nt, nq)
        phys = elements.physical_points(mesh, rule.points)
        self.X, self.Y = phys[..., 0], phys[..., 1]
        self._bases = {}
        for name in FIELD_NAMES:
            space = spaces.by_name(name)
            key = id(space)
            if key in self._bases:
                continue
            vals, _ = space.tabulate(rule.points)
            grads = elements.physical_gradients(space, rule.points)
            entry = {"phi": vals, "grad": grads}
            if space.value_rank == "vector2":
                nt, nq = grads.shape[:2]
                entry["div"] = grads.reshape(nt, nq, -1)
            self._bases[key] = entry
        self.spaces = spaces

    def phi(self, name):
        return self._bases[id(self.spaces.by_name(name))]["phi"]

    def grad(self, name):
        return self._bases[id(self.spaces.by_name(name))]["grad"]

    def div(self, name):
        return self._bases[id(self.spaces.by_name(name))]["div"]


def _vector_mass(weight, phi_r, phi_c):
    m = np.einsum("tq,qi,qj->tij", weight, phi_r, phi_c)
    nt, nr, nc = m.shape
    out = np.zeros((nt, nr, 2, nc, 2))
    out[:, :, 0, :, 0] = m
    out[:, :, 1, :, 1] = m
    return out.reshape(nt, 2 * nr, 2 * nc)


def default_quad_exactness(spaces):
    """2 * (max polynomial degree in the form) + 3; the margin controls
    the consistency error from non-polynomial data fields."""
    return min(10, 2 * spaces.max_degree() + 3)


def assemble(mesh, formulation, data, params=None, quad_exactness=None,
             symmetric_variant=False):
    """Assemble the coupled system for one formulation.

    Returns the pre-Dirichlet :class:`BlockSystem`; strong boundary
    conditions are applied separately by :func:`apply_dirichlet`.
    """
    data.check_tags(mesh)
    spaces = formulation.build_spaces(mesh)
    if params is None:
        params = formulation.params()
    if quad_exactness is None:
        quad_exactness = default_quad_exactness(spaces)
    rule = quadrature(quad_exactness)
    tab = _Tabulation(spaces, rule)
    offsets, n_dofs = spaces.offsets()

    kp = float(data.kappa)
    al, ga, et = params.alpha, params.gamma, params.eta
    th, bt = params.theta, params.beta
    ell_s, ell_mu = stabilization_lengths(mesh, params)

    W = tab.W
    X, Y = tab.X, tab.Y
    zeta_q = _scalar_at(data.zeta, X, Y)
    q_q = _scalar_at(data.q, X, Y)
    f_q = _scalar_at(data.f, X, Y)
    e_dat = _vector_at(data.e_data, X, Y)
    s_dat = _vector_at(data.s_data, X, Y)

    w_ts = th * kp * (ell_s ** 2)[:, None] * W if th else None
    w_b = bt * (ell_mu ** 2)[:, None] * W if bt else None

    phi_u = tab.phi("u")
    grad_u = tab.grad("u")
    phi_v = tab.phi("e")
    div_v = tab.div("e")

    rows, cols, vals = [], [], []
    dofs = {name: spaces.by_name(name).element_dofs() + offsets[name]
            for name in FIELD_NAMES}

    def add(row_name, col_name, mats):
        nt, nr, nc = mats.shape
        r = np.broadcast_to(dofs[row_name][:, :, None], mats.shape)
        c = np.broadcast_to(dofs[col_name][:, None, :], mats.shape)
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(np.ascontiguousarray(mats).ravel())

    # --- primal-primal ------------------------------------------------
    if al:
        add("u", "u", al * np.einsum("tq,tqia,tqja->tij", W, grad_u, grad_u))
        b_ue = -al * np.einsum("tq,qj,tqic->tijc", W, phi_v, grad_u)
        b_ue = b_ue.reshape(b_ue.shape[0], b_ue.shape[1], -1)
        add("u", "e", b_ue)
        add("e", "u", b_ue.transpose(0, 2, 1))
    if w_ts is not None and zeta_q is not None:
        add("u", "u", np.einsum("tq,qi,qj->tij", w_ts * zeta_q ** 2,
                                phi_u, phi_u))
        b_us = np.einsum("tq,qi,tqj->tij", w_ts * zeta_q, phi_u, div_v)
        add("u", "s", b_us)
        add("s", "u", b_us.transpose(0, 2, 1))
    add("e", "e", (1.0 + al - ga) * _vector_mass(W, phi_v, phi_v))
    m_ss = (1.0 - et) * kp * _vector_mass(W, phi_v, phi_v)
    add("s", "s", m_ss)
    if w_ts is not None:
        add("s", "s", np.einsum("tq,tqi,tqj->tij", w_ts, div_v, div_v))

    # --- primal-dual coupling (skew) ------------------------------------
    dual_sign = 1.0 if symmetric_variant else -1.0
    if zeta_q is not None:
        b_ul = np.einsum("tq,qi,qj->tij", W * zeta_q, phi_u, phi_u)
        add("u", "lam", b_ul)
        add("lam", "u", dual_sign * b_ul.transpose(0, 2, 1))
    b_um = -np.einsum("tq,qj,tqic->tijc", W, phi_v, grad_u)
    b_um = b_um.reshape(b_um.shape[0], b_um.shape[1], -1)
    add("u", "mu", b_um)
    add("mu", "u", dual_sign * b_um.transpose(0, 2, 1))
    b_em = (1.0 - ga) * _vector_mass(W, phi_v, phi_v)
    add("e", "mu", b_em)
    add("mu", "e", dual_sign * b_em.transpose(0, 2, 1))
    b_sl = -(1.0 - et) * np.einsum("tq,qi,tqjc->ticj", W, phi_v, grad_u)
    b_sl = b_sl.reshape(b_sl.shape[0], -1, b_sl.shape[-1])
    add("s", "lam", b_sl)
    add("lam", "s", dual_sign * b_sl.transpose(0, 2, 1))

    # --- dual-dual ------------------------------------------------------
    dd = -dual_sign  # +1 in the default convention, -1 when symmetric
    if et:
        add("lam", "lam",
            dd * (et / kp) * np.einsum("tq,tqia,tqja->tij", W,
                                       grad_u, grad_u))
    if w_b is not None and zeta_q is not None:
        add("lam", "lam", dd * np.einsum("tq,qi,qj->tij", w_b * zeta_q ** 2,
                                         phi_u, phi_u))
        b_lm = np.einsum("tq,qi,tqj->tij", w_b * zeta_q, phi_u, div_v)
        add("lam", "mu", dd * b_lm)
        add("mu", "lam", dd * b_lm.transpose(0, 2, 1))
    if ga:
        add("mu", "mu", dd * ga * _vector_mass(W, phi_v, phi_v))
    if w_b is not None:
        add("mu", "mu", dd * np.einsum("tq,tqi,tqj->tij", w_b, div_v, div_v))

    matrix = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_dofs, n_dofs)).tocsr()

    # --- right-hand side -------------------------------------------------
    rhs = np.zeros(n_dofs)

    def load(name, contrib):
        np.add.at(rhs, dofs[name].ravel(), contrib.ravel())

    if q_q is not None and w_ts is not None and zeta_q is not None:
        load("u", np.einsum("tq,qi->ti", w_ts * zeta_q * q_q, phi_u))
    if f_q is not None:
        load("u", np.einsum("tq,qi->ti", W * f_q, phi_u))
    if e_dat is not None:
        fe = (1.0 - ga) * np.einsum("tq,tqc,qi->tic", W, e_dat, phi_v)
        load("e", fe.reshape(fe.shape[0], -1))
        if ga:
            fm = -dual_sign * ga * np.einsum("tq,tqc,qi->tic", W, e_dat,
                                             phi_v)
            load("mu", fm.reshape(fm.shape[0], -1))
    if s_dat is not None:
        fs = (1.0 - et) * kp * np.einsum("tq,tqc,qi->tic", W, s_dat, phi_v)
        load("s", fs.reshape(fs.shape[0], -1))
        if et:
            load("lam", dual_sign * et * np.einsum("tq,tqc,tqic->ti", W,
                                                   s_dat, grad_u))
    if q_q is not None:
        if w_ts is not None:
            load("s", np.einsum("tq,tqi->ti", w_ts * q_q, div_v))
        load("lam", dual_sign * np.einsum("tq,qi->ti", W * q_q, phi_u))
    if f_q is not None and w_b is not None:
        if zeta_q is not None:
            load("lam", -dual_sign
                 * np.einsum("tq,qi->ti", w_b * zeta_q * f_q, phi_u))
        load("mu", -dual_sign * np.einsum("tq,tqi->ti", w_b * f_q, div_v))

    _add_neumann_loads(rhs, spaces, offsets, data, quad_exactness,
                       dual_sign)

    return BlockSystem(matrix=matrix, rhs=rhs, offsets=offsets,
                       n_dofs=n_dofs, spaces=spaces,
                       symmetric_variant=symmetric_variant)


def _add_neumann_loads(rhs, spaces, offsets, data, quad_exactness,
                       dual_sign):
    """Boundary loads from integration by parts of the flux and
    multiplier terms: -(g_mu, du) on the potential equation and
    -(g_s, dlam) on the (unnegated) multiplier equation."""
    if not data.neumann:
        return
    mesh = spaces.mesh
    space = spaces.u  # u and lambda share the trace space
    n1d = max(2, (quad_exactness + 2) // 2)
    ts, ws = gauss_legendre_01(n1d)
    owners = mesh.boundary_edge_elements()
    inv_jac_t = elements.inverse_jacobians_t(mesh)
    centroids = mesh.centroids
    p0 = mesh.vertices[mesh.triangles[:, 0]]

    for idx, ((a, b), tag) in enumerate(zip(mesh.boundary_edges,
                                            mesh.boundary_tags)):
        pair = data.neumann.get(tag)
        if pair is None:
            continue
        g_s, g_mu = pair
        elem, _ = owners[idx]
        pa, pb = mesh.vertices[a], mesh.vertices[b]
        tangent = pb - pa
        length = float(np.hypot(*tangent))
        normal = np.array([tangent[1], -tangent[0]]) / length
        mid = 0.5 * (pa + pb)
        if normal @ (centroids[elem] - mid) > 0.0:
            normal = -normal
        xq = pa[None, :] + ts[:, None] * tangent[None, :]
        ref = (xq - p0[elem]) @ inv_jac_t[elem]    # J^{-1} (x - p0)
        vals, _ = space.tabulate(ref)
        edge_w = ws * length
        gdofs = space.dof_map[elem]
        if g_mu is not None:
            gm = np.asarray(g_mu(xq[:, 0], xq[:, 1], normal[0], normal[1]),
                            dtype=float)
            np.add.at(rhs, gdofs + offsets["u"],
                      -np.einsum("q,q,qi->i", edge_w, gm, vals))
        if g_s is not None:
            gs = np.asarray(g_s(xq[:, 0], xq[:, 1], normal[0], normal[1]),
                            dtype=float)
            np.add.at(rhs, gdofs + offsets["lam"],
                      -dual_sign * np.einsum("q,q,qi->i", edge_w, gs, vals))


# ----------------------------------------------------------------------
# strong Dirichlet conditions


def _edge_scalar_nodes(space, edge_pair):
    """Global scalar node numbers on one mesh edge (vertices + edge
    nodes) for a CG space."""
    mesh = space.mesh
    a, b = int(edge_pair[0]), int(edge_pair[1])
    nodes = [a, b]
    n_edge = space.degree - 1
    if n_edge:
        ge = mesh.edge_index[(min(a, b), max(a, b))]
        base = mesh.n_vertices + ge * n_edge
        nodes.extend(range(base, base + n_edge))
    return nodes


def dirichlet_values(system, data):
    """Constrained global dofs with their boundary values."""
    spaces = system.spaces
    mesh = spaces.mesh
    values = {}

    def constrain(space, offset, g, tag, a, b):
        for node in _edge_scalar_nodes(space, (a, b)):
            x, y = space.node_coords[node]
            val = float(g(x, y))
            dof = offset + node
            old = values.get(dof)
            if old is not None and abs(old - val) > _CONFLICT_TOL:
                raise ValueError(
                    f"conflicting Dirichlet values at node ({x:.6g}, "
                    f"{y:.6g}): {old!r} vs {val!r} (tag {tag!r})")
            values[dof] = val

    for (a, b), tag in zip(mesh.boundary_edges, mesh.boundary_tags):
        pair = data.dirichlet.get(tag)
        if pair is None:
            continue
        g_u, g_lam = pair
        if g_u is not None:
            constrain(spaces.u, system.offsets["u"], g_u, tag, a, b)
        if g_lam is not None:
            constrain(spaces.lam, system.offsets["lam"], g_lam, tag, a, b)
    return values


def apply_dirichlet(system, data):
    """Strongly enforce boundary values on the u and lambda dofs.

    Constrained rows become identity rows; their columns are moved to
    the right-hand side (symmetric elimination).  Returns a new system,
    the input is untouched.
    """
    values = dirichlet_values(system, data)
    n = system.n_dofs
    lifted = np.array(system.rhs)
    if values:
        idx = np.fromiter(values.keys(), dtype=np.int64, count=len(values))
        val = np.fromiter(values.values(), dtype=float, count=len(values))
        x_bc = np.zeros(n)
        x_bc[idx] = val
        lifted -= system.matrix @ x_bc
        keep = np.ones(n)
        keep[idx] = 0.0
        d_keep = sp.diags(keep)
        matrix = (d_keep @ system.matrix @ d_keep
                  + sp.diags(1.0 - keep)).tocsr()
        lifted[idx] = val
    else:
        matrix = system.matrix.copy()
    return BlockSystem(matrix=matrix, rhs=lifted, offsets=system.offsets,
                       n_dofs=n, spaces=system.spaces,
                       symmetric_variant=system.symmetric_variant,
                       constrained=values)


# ----------------------------------------------------------------------
# discrete stability norm (fully stabilized variant)


def stability_norm_matrix(spaces, kappa, h):
    """Gram matrix of the mesh-dependent stability norm.

    |||(u, e, s, lam, mu)|||^2 = |grad u|^2 + |e|^2 + kappa |s|^2
        + (1/kappa) |grad lam|^2 + |mu|^2
        + kappa h^2 |div s|_h^2 + h^2 |div mu|_h^2
    """
    rule = quadrature(min(10, 2 * spaces.max_degree() + 1))
    tab = _Tabulation(spaces, rule)
    offsets, n_dofs = spaces.offsets()
    W = tab.W
    grad_u = tab.grad("u")
    phi_v = tab.phi("e")
    div_v = tab.div("e")

    stiff = np.einsum("tq,tqia,tqja->tij", W, grad_u, grad_u)
    vmass = _vector_mass(W, phi_v, phi_v)
    divg = np.einsum("tq,tqi,tqj->tij", W, div_v, div_v)

    blocks = {
        "u": stiff,
        "e": vmass,
        "s": kappa * vmass + kappa * h ** 2 * divg,
        "lam": stiff / kappa,
        "mu": vmass + h ** 2 * divg,
    }
    rows, cols, vals = [], [], []
    for name, mats in blocks.items():
        gd = spaces.by_name(name).element_dofs() + offsets[name]
        rows.append(np.broadcast_to(gd[:, :, None], mats.shape).ravel())
        cols.append(np.broadcast_to(gd[:, None, :], mats.shape).ravel())
        vals.append(np.ascontiguousarray(mats).ravel())
    return sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_dofs, n_dofs)).tocsr()
