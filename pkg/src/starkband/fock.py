"""Bosonic Fock basis for N particles on a two-band ring of L sites, and the
translation-symmetric kappa = 0 sector built from its orbits.

States are occupation tuples |n_1^a .. n_L^a ; n_1^b .. n_L^b>.  The full
basis is enumerated in a fixed order (leading mode occupation descending),
and that order coincides with the combinatorial ranking used for O(L)
state lookup, so no search tables are ever scanned.

On a ring the simultaneous cyclic shift of both bands commutes with the
gauge-transformed Hamiltonian; grouping the basis into translation orbits
and keeping the equal-phase (kappa = 0) combination of each orbit cuts the
dimension by a factor of order L.
"""

import math
from dataclasses import dataclass
from math import comb
from typing import NamedTuple

import numpy as np

__all__ = [
    "FockState",
    "SymmetrySector",
    "full_dimension",
    "enumerate_fock",
    "state_rank",
    "translate",
    "build_k0_sector",
    "project_initial_state",
    "DEFAULT_DIMENSION_CAP",
]

# Guards in-memory enumeration; (7, 7) needs 77520 states, so this leaves
# generous headroom without letting a typo exhaust memory.
DEFAULT_DIMENSION_CAP = 2_000_000


class FockState(NamedTuple):
    """Occupation numbers per site for the lower (a) and upper (b) band."""

    lower: tuple
    upper: tuple

    @property
    def n_sites(self) -> int:
        return len(self.lower)

    @property
    def n_particles(self) -> int:
        return sum(self.lower) + sum(self.upper)

    def __str__(self):
        return "|%s;%s>" % (",".join(map(str, self.lower)), ",".join(map(str, self.upper)))


def full_dimension(n_particles: int, n_sites: int) -> int:
    """Dimension (N + 2L - 1)! / [N! (2L - 1)!] of the fixed-N Fock space.

    Exact integer arithmetic; Python integers cannot silently overflow.
    """
    if n_particles < 0:
        raise ValueError(f"particle number must be non-negative, got {n_particles}")
    if n_sites < 1:
        raise ValueError(f"need at least one site, got {n_sites}")
    return comb(n_particles + 2 * n_sites - 1, n_particles)


def _compositions(total, modes):
    # all occupation tuples of `modes` modes summing to `total`,
    # leading occupation descending (so |N,0,...> comes first)
    if modes == 1:
        yield (total,)
        return
    for v in range(total, -1, -1):
        for rest in _compositions(total - v, modes - 1):
            yield (v,) + rest


def enumerate_fock(n_particles, n_sites, dimension_cap=DEFAULT_DIMENSION_CAP):
    """Complete, duplicate-free list of FockStates in ranking order."""
    dim = full_dimension(n_particles, n_sites)
    if dim > dimension_cap:
        raise ValueError(
            f"Fock dimension {dim} for N={n_particles}, L={n_sites} exceeds the cap {dimension_cap}"
        )
    L = n_sites
    return [FockState(t[:L], t[L:]) for t in _compositions(n_particles, 2 * n_sites)]


def state_rank(state: FockState) -> int:
    """Position of `state` in the enumerate_fock ordering, in O(L) time.

    Combinatorial number system: modes are filled left to right, and for each
    mode all states with a larger occupation at that mode come earlier.
    """
    occ = state.lower + state.upper
    m = len(occ)
    rem = sum(occ)
    rank = 0
    for j, v in enumerate(occ[:-1]):
        if v < rem:
            # count states whose occupation at mode j exceeds v
            rank += comb(rem - v + (m - j) - 2, rem - v - 1)
        rem -= v
    return rank


def translate(state: FockState) -> FockState:
    """Cyclic shift l -> l+1 (mod L) applied to both bands simultaneously."""
    lo, up = state
    return FockState(lo[-1:] + lo[:-1], up[-1:] + up[:-1])


@dataclass(frozen=True)
class SymmetrySector:
    """The kappa = 0 translation-symmetric basis.

    Each basis vector is the equal-amplitude, normalized sum over one
    translation orbit; `norms[i] = 1/sqrt(orbit_sizes[i])` is the amplitude
    carried by every distinct orbit member.  `rep_of_rank`/`shift_of_rank`
    map the rank of any full-basis state to its representative index and the
    number of translations from the representative to that state.
    """

    n_particles: int
    n_sites: int
    kappa: int
    representatives: tuple
    orbit_sizes: np.ndarray
    norms: np.ndarray
    rep_of_rank: np.ndarray
    shift_of_rank: np.ndarray
    upper_fractions: np.ndarray  # per representative: sum(upper) / N

    @property
    def dim(self) -> int:
        return len(self.representatives)

    def __len__(self) -> int:
        return self.dim

    @property
    def full_dim(self) -> int:
        return len(self.rep_of_rank)

    def lookup(self, state: FockState) -> tuple[int, int]:
        """(representative index, shift) for any same-(N, L) Fock state."""
        r = state_rank(state)
        return int(self.rep_of_rank[r]), int(self.shift_of_rank[r])

    def expand(self, coords) -> np.ndarray:
        """Embed sector coordinates as a full-Fock-basis vector."""
        coords = np.asarray(coords)
        full = np.zeros(self.full_dim, dtype=complex)
        for i, rep in enumerate(self.representatives):
            amp = coords[i] * self.norms[i]
            s = rep
            for _ in range(int(self.orbit_sizes[i])):
                full[state_rank(s)] += amp
                s = translate(s)
        return full


def build_k0_sector(n_particles, n_sites, dimension_cap=DEFAULT_DIMENSION_CAP) -> SymmetrySector:
    """Group the full Fock basis into translation orbits and assemble kappa=0.

    The representative of each orbit is its lexicographically smallest state;
    representatives are listed in order of first encounter during the full
    enumeration, which makes the basis deterministic.
    """
    basis = enumerate_fock(n_particles, n_sites, dimension_cap)
    dim = len(basis)
    rep_of_rank = np.full(dim, -1, dtype=np.int64)
    shift_of_rank = np.zeros(dim, dtype=np.int64)
    reps = []
    sizes = []
    for idx, state in enumerate(basis):
        if rep_of_rank[idx] >= 0:
            continue
        orbit = [state]
        s = translate(state)
        while s != state:
            orbit.append(s)
            s = translate(s)
        size = len(orbit)
        rep = min(orbit)
        pos = orbit.index(rep)
        rep_idx = len(reps)
        reps.append(rep)
        sizes.append(size)
        for j in range(size):
            member = orbit[(pos + j) % size]  # member = T^j(rep)
            r = state_rank(member)
            rep_of_rank[r] = rep_idx
            shift_of_rank[r] = j

    sizes = np.asarray(sizes, dtype=np.int64)
    n = n_particles
    fractions = np.array([sum(rep.upper) / n for rep in reps]) if n else np.zeros(len(reps))
    return SymmetrySector(
        n_particles=n_particles,
        n_sites=n_sites,
        kappa=0,
        representatives=tuple(reps),
        orbit_sizes=sizes,
        norms=1.0 / np.sqrt(sizes),
        rep_of_rank=rep_of_rank,
        shift_of_rank=shift_of_rank,
        upper_fractions=fractions,
    )


def _lower_band_ground(sector: SymmetrySector) -> np.ndarray:
    """Sector coordinates of the ground state of the untilted lower-band
    hopping Hamiltonian (g = 0, upper band empty)."""
    zero_upper = [i for i, rep in enumerate(sector.representatives) if sum(rep.upper) == 0]
    if not zero_upper:
        raise ValueError("sector has no states with an empty upper band")
    sub_index = {i: k for k, i in enumerate(zero_upper)}
    n0 = len(zero_upper)
    L = sector.n_sites

    # K = sum_l (a^dag_{l+1} a_l + h.c.) on the ring, within the sub-basis;
    # the hopping Hamiltonian is -t_a/2 * K, so its ground state maximizes K.
    kin = np.zeros((n0, n0))
    for i in zero_upper:
        rep = sector.representatives[i]
        col = sub_index[i]
        lo = rep.lower
        if L < 2:
            continue
        for src in range(L):
            for dst in ((src + 1) % L, (src - 1) % L):
                if lo[src] == 0:
                    continue
                new = list(lo)
                new[src] -= 1
                new[dst] += 1
                amp = math.sqrt(lo[src] * (lo[dst] + 1))
                tgt, _ = sector.lookup(FockState(tuple(new), rep.upper))
                factor = math.sqrt(sector.orbit_sizes[i] / sector.orbit_sizes[tgt])
                kin[sub_index[tgt], col] += amp * factor

    # dense solve keeps the result deterministic (no Lanczos start vector)
    _, vecs = np.linalg.eigh(-kin)
    ground = vecs[:, 0]
    if ground[int(np.argmax(np.abs(ground)))] < 0:
        ground = -ground
    coords = np.zeros(sector.dim, dtype=complex)
    coords[zero_upper] = ground
    return coords


def project_initial_state(spec, sector: SymmetrySector) -> np.ndarray:
    """Normalized kappa = 0 coordinate vector for an initial-state descriptor.

    Descriptors:
      - "unit-filling-lower": one particle per lower-band site (needs N = L);
        this state is translation invariant, so it is a single basis vector.
      - "lower-band-ground": ground state of the untilted, non-interacting
        lower-band hopping Hamiltonian within the sector.
      - an explicit FockState (or (lower, upper) tuple pair): its normalized
        equal-phase orbit sum, i.e. the sector basis vector of its orbit.
        Every orbit has a non-vanishing kappa = 0 component, so the explicit
        route cannot fail by projection.
    """
    if isinstance(spec, str):
        if spec == "unit-filling-lower":
            if sector.n_particles != sector.n_sites:
                raise ValueError(
                    "unit-filling-lower needs N = L, got "
                    f"N={sector.n_particles}, L={sector.n_sites}"
                )
            state = FockState((1,) * sector.n_sites, (0,) * sector.n_sites)
        elif spec == "lower-band-ground":
            return _lower_band_ground(sector)
        else:
            raise ValueError(f"unknown initial-state descriptor {spec!r}")
    else:
        lower, upper = spec
        state = FockState(tuple(lower), tuple(upper))
        if state.n_sites != sector.n_sites or len(state.upper) != sector.n_sites:
            raise ValueError(f"state {state} does not match L={sector.n_sites}")
        if state.n_particles != sector.n_particles:
            raise ValueError(f"state {state} does not hold N={sector.n_particles} particles")
        if any(n < 0 for n in state.lower + state.upper):
            raise ValueError(f"negative occupation in {state}")

    idx, _ = sector.lookup(state)
    coords = np.zeros(sector.dim, dtype=complex)
    coords[idx] = 1.0
    return coords
