"""Triangular meshes of the unit square and of circular-sector domains.

Meshes are plain vertex/triangle/boundary-edge containers with a cached
per-element geometry (Jacobian of the map from the reference triangle,
areas, diameters).  All triangles are stored counter-clockwise and the
arrays are frozen after construction, so a mesh can be shared freely
between threads.
"""

import numpy as np

# Tags a boundary edge may carry.  Square domains use the first four,
# sector domains the last three.
BOUNDARY_TAGS = (
    "left",
    "right",
    "bottom",
    "top",
    "wedge_edge_0",
    "wedge_edge_1",
    "arc",
)

_GEOM_TOL = 1e-12


class MeshFormatError(ValueError):
    """Raised when a mesh file or mesh data fails validation."""


class ElementGeometry:
    """Affine geometry of one triangle.

    Attributes
    ----------
    jacobian : (2, 2) array
        Map from the reference triangle {(0,0), (1,0), (0,1)} to the
        physical element.
    jacobian_det : float
        Signed determinant (positive for CCW triangles).
    area : float
        Element area, equal to ``jacobian_det / 2``.
    diameter : float
        Longest edge length.
    """

    __slots__ = ("jacobian", "jacobian_det", "area", "diameter")

    def __init__(self, jacobian, jacobian_det, area, diameter):
        self.jacobian = jacobian
        self.jacobian_det = jacobian_det
        self.area = area
        self.diameter = diameter


class Mesh:
    """Immutable 2D triangulation with tagged boundary edges.

    Parameters
    ----------
    vertices : (nv, 2) float array
    triangles : (nt, 3) int array
        Vertex indices, counter-clockwise.
    boundary_edges : (nb, 2) int array
        Vertex pairs lying on the domain boundary.
    boundary_tags : sequence of str, length nb
        One tag from ``BOUNDARY_TAGS`` per boundary edge.
    """

    def __init__(self, vertices, triangles, boundary_edges, boundary_tags,
                 validate=True):
        self.vertices = np.ascontiguousarray(vertices, dtype=float)
        self.triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        self.boundary_edges = np.ascontiguousarray(boundary_edges,
                                                   dtype=np.int64)
        if self.boundary_edges.size == 0:
            self.boundary_edges = self.boundary_edges.reshape(0, 2)
        self.boundary_tags = tuple(boundary_tags)
        if validate:
            self._validate()
        for arr in (self.vertices, self.triangles, self.boundary_edges):
            arr.flags.writeable = False
        self._cache = {}

    # ------------------------------------------------------------------
    # validation

    def _validate(self):
        nv = len(self.vertices)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2:
            raise MeshFormatError("vertex array must have shape (nv, 2)")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise MeshFormatError("triangle array must have shape (nt, 3)")
        if len(self.boundary_tags) != len(self.boundary_edges):
            raise MeshFormatError("one tag required per boundary edge")
        for tag in self.boundary_tags:
            if tag not in BOUNDARY_TAGS:
                raise MeshFormatError(f"unknown boundary tag {tag!r}")
        if self.triangles.size and (self.triangles.min() < 0
                                    or self.triangles.max() >= nv):
            bad = np.argwhere((self.triangles < 0)
                              | (self.triangles >= nv))[0, 0]
            raise MeshFormatError(
                f"triangle {bad} references a vertex out of range")
        if self.boundary_edges.size and (self.boundary_edges.min() < 0
                                         or self.boundary_edges.max() >= nv):
            raise MeshFormatError("boundary edge references a vertex "
                                  "out of range")

        v = self.vertices
        t = self.triangles
        if len(t):
            signed = _signed_areas(v, t)
            if np.any(signed <= 0.0):
                bad = int(np.argmin(signed))
                raise MeshFormatError(
                    f"triangle {bad} is not counter-clockwise "
                    f"(signed area {signed[bad]:.3e})")

        # Edge-manifold check: interior edges touch two triangles,
        # boundary edges exactly one, and the declared boundary list must
        # match the set of single-triangle edges.
        counts = {}
        for tri in t:
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                key = (min(a, b), max(a, b))
                counts[key] = counts.get(key, 0) + 1
        over = [k for k, c in counts.items() if c > 2]
        if over:
            raise MeshFormatError(
                f"edge {over[0]} is shared by more than two triangles")
        declared = set()
        for i, (a, b) in enumerate(self.boundary_edges):
            key = (min(a, b), max(a, b))
            if key in declared:
                raise MeshFormatError(f"boundary edge {i} listed twice")
            declared.add(key)
            if counts.get(key, 0) != 1:
                raise MeshFormatError(
                    f"boundary edge {i} = {key} does not bound exactly "
                    "one triangle")
        lonely = [k for k, c in counts.items()
                  if c == 1 and k not in declared]
        if lonely:
            raise MeshFormatError(
                f"edge {lonely[0]} bounds a single triangle but is not "
                "declared as a boundary edge")

    # ------------------------------------------------------------------
    # sizes

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    # ------------------------------------------------------------------
    # cached element geometry

    def _geometry(self):
        geo = self._cache.get("geometry")
        if geo is None:
            v, t = self.vertices, self.triangles
            p0 = v[t[:, 0]]
            jac = np.stack([v[t[:, 1]] - p0, v[t[:, 2]] - p0], axis=-1)
            det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
            e0 = np.linalg.norm(v[t[:, 1]] - v[t[:, 0]], axis=1)
            e1 = np.linalg.norm(v[t[:, 2]] - v[t[:, 1]], axis=1)
            e2 = np.linalg.norm(v[t[:, 0]] - v[t[:, 2]], axis=1)
            diam = np.maximum(e0, np.maximum(e1, e2))
            geo = (jac, det, 0.5 * det, diam)
            for arr in geo:
                arr.flags.writeable = False
            self._cache["geometry"] = geo
        return geo

    @property
    def jacobians(self):
        """(nt, 2, 2) reference-to-physical Jacobians."""
        return self._geometry()[0]

    @property
    def jacobian_dets(self):
        return self._geometry()[1]

    @property
    def areas(self):
        return self._geometry()[2]

    @property
    def diameters(self):
        return self._geometry()[3]

    @property
    def centroids(self):
        c = self._cache.get("centroids")
        if c is None:
            c = self.vertices[self.triangles].mean(axis=1)
            c.flags.writeable = False
            self._cache["centroids"] = c
        return c

    def element_geometry(self, index):
        """Typed geometry view of one element."""
        jac, det, area, diam = self._geometry()
        return ElementGeometry(jac[index], float(det[index]),
                               float(area[index]), float(diam[index]))

    # ------------------------------------------------------------------
    # edge connectivity (used by CG dof maps and boundary integrals)

    @property
    def edges(self):
        """Sorted (a < b) unique edges, lexicographic order."""
        self._build_edges()
        return self._cache["edges"]

    @property
    def edge_index(self):
        """dict mapping sorted vertex pair -> edge number."""
        self._build_edges()
        return self._cache["edge_index"]

    def _build_edges(self):
        if "edges" in self._cache:
            return
        t = self.triangles
        pairs = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        pairs = np.sort(pairs, axis=1)
        edges = np.unique(pairs, axis=0)
        edges.flags.writeable = False
        self._cache["edges"] = edges
        self._cache["edge_index"] = {(int(a), int(b)): i
                                     for i, (a, b) in enumerate(edges)}

    def boundary_edge_elements(self):
        """For each boundary edge: (triangle index, local edge index).

        Local edges are numbered 0: (v0,v1), 1: (v1,v2), 2: (v2,v0).
        """
        cached = self._cache.get("boundary_elems")
        if cached is None:
            owner = {}
            for ti, tri in enumerate(self.triangles):
                locs = ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0]))
                for le, (a, b) in enumerate(locs):
                    owner[(min(a, b), max(a, b))] = (ti, le)
            cached = []
            for a, b in self.boundary_edges:
                cached.append(owner[(min(a, b), max(a, b))])
            cached = tuple(cached)
            self._cache["boundary_elems"] = cached
        return cached


def _signed_areas(vertices, triangles):
    p0 = vertices[triangles[:, 0]]
    p1 = vertices[triangles[:, 1]]
    p2 = vertices[triangles[:, 2]]
    return 0.5 * ((p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
                  - (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1]))


# ----------------------------------------------------------------------
# generators


def unit_square_mesh(n):
    """Structured triangulation of [0, 1]^2 with 2*n^2 triangles.

    Each grid cell is split along its lower-left to upper-right diagonal
    so the mesh is bit-reproducible.  Boundary edges are tagged
    left/right/bottom/top.
    """
    if n < 1:
        raise ValueError(f"grid count must be >= 1, got {n}")
    n = int(n)
    coords = np.arange(n + 1) / n
    xs, ys = np.meshgrid(coords, coords, indexing="xy")
    vertices = np.column_stack([xs.ravel(), ys.ravel()])

    def vid(i, j):
        # row i (y), column j (x)
        return i * (n + 1) + j

    triangles = []
    for i in range(n):
        for j in range(n):
            ll, lr = vid(i, j), vid(i, j + 1)
            ul, ur = vid(i + 1, j), vid(i + 1, j + 1)
            triangles.append((ll, lr, ur))
            triangles.append((ll, ur, ul))
    edges = []
    tags = []
    for j in range(n):
        edges.append((vid(0, j), vid(0, j + 1)))
        tags.append("bottom")
        edges.append((vid(n, j), vid(n, j + 1)))
        tags.append("top")
    for i in range(n):
        edges.append((vid(i, 0), vid(i + 1, 0)))
        tags.append("left")
        edges.append((vid(i, n), vid(i + 1, n)))
        tags.append("right")
    mesh = Mesh(vertices, np.array(triangles), np.array(edges), tags)
    _check_on_boundary(mesh, _square_boundary_distance)
    return mesh


def reentrant_mesh(phi, n_radial, n_angular, grading=2.0):
    """Circular sector of radius 1 with a re-entrant corner at the origin.

    The sector opens over theta in [0, psi] with psi = 2*pi - phi.  Radial
    node layers sit at r_j = (j / n_radial)**grading, so grading = 1 is
    uniform and grading > 1 refines toward the corner.  The outer circle
    is approximated by chords tagged "arc"; the straight edges are tagged
    "wedge_edge_0" (theta = 0) and "wedge_edge_1" (theta = psi).
    """
    if not 0.0 < phi < np.pi:
        raise ValueError(f"corner angle must lie in (0, pi), got {phi}")
    if n_radial < 1 or n_angular < 1:
        raise ValueError("n_radial and n_angular must be >= 1")
    if grading < 1.0:
        raise ValueError(f"grading must be >= 1, got {grading}")
    psi = 2.0 * np.pi - phi
    dtheta = psi / n_angular
    if dtheta >= np.pi:
        raise ValueError(
            f"n_angular = {n_angular} is degenerate for opening angle "
            f"{psi:.4f}: angular step must be < pi")

    radii = (np.arange(1, n_radial + 1) / n_radial) ** grading
    thetas = psi * np.arange(n_angular + 1) / n_angular
    cos_t, sin_t = np.cos(thetas), np.sin(thetas)
    # Pin the wedge rays exactly onto the boundary rays.
    sin_t[0] = 0.0
    cos_t[0] = 1.0

    vertices = [(0.0, 0.0)]
    for r in radii:
        for c, s in zip(cos_t, sin_t):
            vertices.append((r * c, r * s))
    vertices = np.array(vertices)

    def vid(j, i):
        # layer j in 1..n_radial, angular index i in 0..n_angular
        return 1 + (j - 1) * (n_angular + 1) + i

    triangles = []
    for i in range(n_angular):
        triangles.append((0, vid(1, i), vid(1, i + 1)))
    for j in range(1, n_radial):
        for i in range(n_angular):
            a = vid(j, i)
            b = vid(j + 1, i)
            c = vid(j + 1, i + 1)
            d = vid(j, i + 1)
            triangles.append((a, b, c))
            triangles.append((a, c, d))

    edges = []
    tags = []
    edges.append((0, vid(1, 0)))
    tags.append("wedge_edge_0")
    edges.append((0, vid(1, n_angular)))
    tags.append("wedge_edge_1")
    for j in range(1, n_radial):
        edges.append((vid(j, 0), vid(j + 1, 0)))
        tags.append("wedge_edge_0")
        edges.append((vid(j, n_angular), vid(j + 1, n_angular)))
        tags.append("wedge_edge_1")
    for i in range(n_angular):
        edges.append((vid(n_radial, i), vid(n_radial, i + 1)))
        tags.append("arc")

    mesh = Mesh(vertices, np.array(triangles), np.array(edges), tags)
    _check_on_boundary(mesh, _sector_boundary_distance(psi))
    return mesh


def _square_boundary_distance(tag, pts):
    x, y = pts[:, 0], pts[:, 1]
    if tag == "left":
        return np.abs(x)
    if tag == "right":
        return np.abs(x - 1.0)
    if tag == "bottom":
        return np.abs(y)
    if tag == "top":
        return np.abs(y - 1.0)
    raise MeshFormatError(f"tag {tag!r} invalid for a square domain")


def _sector_boundary_distance(psi):
    def dist(tag, pts):
        x, y = pts[:, 0], pts[:, 1]
        if tag == "wedge_edge_0":
            return np.abs(y)
        if tag == "wedge_edge_1":
            # distance to the ray at angle psi
            return np.abs(-np.sin(psi) * x + np.cos(psi) * y)
        if tag == "arc":
            return np.abs(np.hypot(x, y) - 1.0)
        raise MeshFormatError(f"tag {tag!r} invalid for a sector domain")
    return dist


def _check_on_boundary(mesh, distance):
    for (a, b), tag in zip(mesh.boundary_edges, mesh.boundary_tags):
        pts = mesh.vertices[[a, b]]
        d = distance(tag, pts)
        if np.any(d > _GEOM_TOL):
            raise MeshFormatError(
                f"boundary edge ({a}, {b}) tagged {tag!r} is off the "
                f"declared boundary by {d.max():.3e}")


def mesh_size(mesh):
    """Largest element diameter h."""
    if mesh.n_triangles == 0:
        raise ValueError("mesh has no triangles")
    return float(mesh.diameters.max())


# ----------------------------------------------------------------------
# plain-text I/O
#
# line 1: nv nt nb, then nv lines "x y", nt lines "i j k" (0-based, CCW),
# nb lines "i j tag".  '#' starts a comment; blank lines are skipped.


def write_mesh(mesh, path):
    with open(path, "w") as fh:
        fh.write(f"{mesh.n_vertices} {mesh.n_triangles} "
                 f"{len(mesh.boundary_edges)}\n")
        for x, y in mesh.vertices:
            fh.write(f"{float(x)!r} {float(y)!r}\n")
        for i, j, k in mesh.triangles:
            fh.write(f"{i} {j} {k}\n")
        for (i, j), tag in zip(mesh.boundary_edges, mesh.boundary_tags):
            fh.write(f"{i} {j} {tag}\n")


def read_mesh(path):
    """Parse and validate the plain-text mesh format."""
    tokens = []  # (line_number, fields)
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                tokens.append((ln, line.split()))

    if not tokens:
        raise MeshFormatError(f"{path}: empty mesh file")

    def fail(ln, msg):
        raise MeshFormatError(f"{path}: line {ln}: {msg}")

    ln, header = tokens[0]
    if len(header) != 3:
        fail(ln, "expected header 'nv nt nb'")
    try:
        nv, nt, nb = (int(tok) for tok in header)
    except ValueError:
        fail(ln, "header counts must be integers")
    if len(tokens) != 1 + nv + nt + nb:
        raise MeshFormatError(
            f"{path}: expected {1 + nv + nt + nb} data lines, "
            f"found {len(tokens)}")

    vertices = np.empty((nv, 2))
    for r in range(nv):
        ln, fields = tokens[1 + r]
        if len(fields) != 2:
            fail(ln, "expected 'x y'")
        try:
            vertices[r] = [float(fields[0]), float(fields[1])]
        except ValueError:
            fail(ln, "vertex coordinates must be numbers")

    triangles = np.empty((nt, 3), dtype=np.int64)
    for r in range(nt):
        ln, fields = tokens[1 + nv + r]
        if len(fields) != 3:
            fail(ln, "expected 'i j k'")
        try:
            triangles[r] = [int(f) for f in fields]
        except ValueError:
            fail(ln, "triangle indices must be integers")
        if triangles[r].min() < 0 or triangles[r].max() >= nv:
            fail(ln, f"triangle {r} vertex index out of range")

    edges = np.empty((nb, 2), dtype=np.int64)
    tags = []
    for r in range(nb):
        ln, fields = tokens[1 + nv + nt + r]
        if len(fields) != 3:
            fail(ln, "expected 'i j tag'")
        try:
            edges[r] = [int(fields[0]), int(fields[1])]
        except ValueError:
            fail(ln, "edge indices must be integers")
        if fields[2] not in BOUNDARY_TAGS:
            fail(ln, f"unknown boundary tag {fields[2]!r}")
        tags.append(fields[2])

    if nt:
        signed = _signed_areas(vertices, triangles)
        if np.any(signed <= 0):
            bad = int(np.argmin(signed))
            fail(tokens[1 + nv + bad][0],
                 f"triangle {bad} is not counter-clockwise")

    try:
        return Mesh(vertices, triangles, edges.reshape(nb, 2), tags)
    except MeshFormatError as err:
        raise MeshFormatError(f"{path}: {err}") from None
