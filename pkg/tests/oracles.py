"""Independent numerical oracles shared by the test modules."""

import numpy as np


def char_poly_roots_4x4(a):
    """Eigenvalue oracle for a 4x4 matrix: characteristic-polynomial
    coefficients from Newton's identities on trace powers, roots by
    Durand-Kerner iteration. No companion matrix, no QR."""
    p = [np.trace(np.linalg.matrix_power(a, k)) for k in range(1, 5)]
    e1 = p[0]
    e2 = (e1 * p[0] - p[1]) / 2
    e3 = (e2 * p[0] - e1 * p[1] + p[2]) / 3
    e4 = (e3 * p[0] - e2 * p[1] + e1 * p[2] - p[3]) / 4
    coeffs = [1.0, -e1, e2, -e3, e4]

    def poly(x):
        out = 0.0 + 0.0j
        for c in coeffs:
            out = out * x + c
        return out

    roots = np.array([(0.4 + 0.9j) ** k for k in range(1, 5)], dtype=complex)
    for _ in range(300):
        new = roots.copy()
        for i in range(4):
            denom = np.prod([roots[i] - roots[j] for j in range(4) if j != i])
            new[i] = roots[i] - poly(roots[i]) / denom
        if np.max(np.abs(new - roots)) < 1e-14:
            roots = new
            break
        roots = new
    return roots


def match_sets(a, b):
    """Greedy min-distance matching error between two complex multisets."""
    b = list(b)
    worst = 0.0
    for x in a:
        dists = [abs(x - y) for y in b]
        k = int(np.argmin(dists))
        worst = max(worst, dists[k])
        b.pop(k)
    return worst


def dyad_moment_errors(arrs, target_d, target_r, m_samples):
    """Standard errors of ensemble-mean density and ratio-of-sums
    reciprocity, from exact per-dyad outcome variances."""
    n = arrs.n
    iu, ju = np.triu_indices(n, k=1)
    pf = arrs.only[iu, ju]
    pb = arrs.only[ju, iu]
    p2 = arrs.both[iu, ju]
    # per-pair link count c in {0,1,2} and ordered reciprocated count b in {0,2}
    ec = pf + pb + 2 * p2
    ec2 = pf + pb + 4 * p2
    var_c = ec2 - ec**2
    eb = 2 * p2
    var_b = 4 * p2 - eb**2
    cov_cb = 4 * p2 - ec * eb
    e_links = ec.sum()
    var_links = var_c.sum()
    var_recip = var_b.sum()
    cov = cov_cb.sum()
    se_density = np.sqrt(var_links / m_samples) / (n * (n - 1))
    var_ratio = (var_recip - 2 * target_r * cov + target_r**2 * var_links) / e_links**2
    se_reciprocity = np.sqrt(var_ratio / m_samples)
    return se_density, se_reciprocity
