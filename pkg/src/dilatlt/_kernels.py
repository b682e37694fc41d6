# Compiled inner loops for the dense complex eigensolver.
# All routines work in place on C-ordered complex128 arrays.
import numba as nb
import numpy as np

_EPS = np.finfo(np.float64).eps
_SAFMIN = np.finfo(np.float64).tiny


@nb.njit(cache=True, nogil=True)
def cabs1(z):
    return abs(z.real) + abs(z.imag)


@nb.njit(cache=True, nogil=True)
def balance(A, scale):
    # diagonal similarity D^-1 A D with powers of two, no permutations
    n = A.shape[0]
    radix = 2.0
    sqrdx = radix * radix
    done = False
    sweeps = 0
    while not done and sweeps < 100:
        done = True
        sweeps += 1
        for i in range(n):
            c = 0.0
            r = 0.0
            for j in range(n):
                if j != i:
                    c += cabs1(A[j, i])
                    r += cabs1(A[i, j])
            if c == 0.0 or r == 0.0:
                continue
            g = r / radix
            f = 1.0
            s = c + r
            while c < g:
                f *= radix
                c *= sqrdx
            g = r * radix
            while c >= g:
                f /= radix
                c /= sqrdx
            if (c + r) / f < 0.95 * s:
                done = False
                scale[i] *= f
                for j in range(n):
                    A[i, j] /= f
                for j in range(n):
                    A[j, i] *= f


@nb.njit(cache=True, nogil=True)
def hessenberg(H, Q, want_q):
    # Householder reduction; Q accumulates the unitary factor (A = Q H Q^*)
    n = H.shape[0]
    v = np.zeros(n, dtype=np.complex128)
    s = np.zeros(n, dtype=np.complex128)
    for k in range(n - 2):
        m = n - k - 1
        alpha = H[k + 1, k]
        xnorm2 = 0.0
        for i in range(k + 2, n):
            xnorm2 += H[i, k].real ** 2 + H[i, k].imag ** 2
        if xnorm2 == 0.0:
            continue
        anorm = abs(alpha)
        norm = np.sqrt(anorm * anorm + xnorm2)
        phase = alpha / anorm if anorm > 0.0 else 1.0 + 0j
        beta = -phase * norm
        v[0] = alpha - beta
        for i in range(1, m):
            v[i] = H[k + 1 + i, k]
        vn2 = 0.0
        for i in range(m):
            vn2 += v[i].real ** 2 + v[i].imag ** 2
        tau = 2.0 / vn2
        # left: H[k+1:, k:] -= tau v (v^* H)
        for j in range(k, n):
            s[j] = 0j
        for i in range(m):
            vi = v[i].conjugate()
            for j in range(k, n):
                s[j] += vi * H[k + 1 + i, j]
        for i in range(m):
            ti = tau * v[i]
            for j in range(k, n):
                H[k + 1 + i, j] -= ti * s[j]
        # right: H[:, k+1:] -= tau (H v) v^*
        for r in range(n):
            acc = 0j
            for i in range(m):
                acc += H[r, k + 1 + i] * v[i]
            acc *= tau
            for i in range(m):
                H[r, k + 1 + i] -= acc * v[i].conjugate()
        if want_q:
            for r in range(n):
                acc = 0j
                for i in range(m):
                    acc += Q[r, k + 1 + i] * v[i]
                acc *= tau
                for i in range(m):
                    Q[r, k + 1 + i] -= acc * v[i].conjugate()
        H[k + 1, k] = beta
        for i in range(k + 2, n):
            H[i, k] = 0j


@nb.njit(cache=True, nogil=True)
def givens(a, b):
    # unitary rotation with [c s; -conj(s) c] [a; b] = [r; 0], c real
    aa = abs(a)
    bb = abs(b)
    if bb == 0.0:
        return 1.0, 0j
    if aa == 0.0:
        return 0.0, b.conjugate() / bb
    nu = np.hypot(aa, bb)
    return aa / nu, (a / aa) * b.conjugate() / nu


@nb.njit(cache=True, nogil=True)
def _rot_rows(H, r, j0, j1, cs, ss):
    # column rotations j0..j1-1, in order, applied to row r
    for j in range(j0, j1):
        c = cs[j]
        s = ss[j]
        t1 = H[r, j]
        t2 = H[r, j + 1]
        H[r, j] = c * t1 + s.conjugate() * t2
        H[r, j + 1] = -s * t1 + c * t2


@nb.njit(cache=True, nogil=True)
def schur_qr(H, Z, want_t, want_z, maxit):
    """Implicit single-shift QR on an upper Hessenberg matrix.

    Returns (status, iterations). status is -1 on success, otherwise the
    index of the active block's last row when the iteration budget ran out;
    entries below that row are already converged.
    """
    n = H.shape[0]
    cs = np.zeros(n)
    ss = np.zeros(n, dtype=np.complex128)
    hi = n - 1
    its = 0
    total = 0
    while hi >= 0:
        lo = hi
        while lo > 0:
            tst = cabs1(H[lo - 1, lo - 1]) + cabs1(H[lo, lo])
            if tst == 0.0:
                tst = 1.0
            if cabs1(H[lo, lo - 1]) <= max(_EPS * tst, _SAFMIN):
                H[lo, lo - 1] = 0j
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            its = 0
            continue
        total += 1
        its += 1
        if total > maxit:
            return hi, total
        if its == 10:
            mu = H[lo, lo] + 0.75 * abs(H[lo + 1, lo].real)
        elif its == 20:
            mu = H[hi, hi] + 0.75 * abs(H[hi, hi - 1].real)
        else:
            # Wilkinson: eigenvalue of the trailing 2x2 closer to H[hi, hi]
            a = H[hi - 1, hi - 1]
            b = H[hi - 1, hi]
            c = H[hi, hi - 1]
            d = H[hi, hi]
            half = 0.5 * (a - d)
            disc = np.sqrt(half * half + b * c)
            p1 = half + disc
            p2 = half - disc
            den = p1 if abs(p1) >= abs(p2) else p2
            mu = d - b * c / den if den != 0 else d
        jlo = 0 if want_t else lo
        jhi = n - 1 if want_t else hi
        x = H[lo, lo] - mu
        y = H[lo + 1, lo]
        for k in range(lo, hi):
            if k > lo:
                x = H[k, k - 1]
                y = H[k + 1, k - 1]
            c, s = givens(x, y)
            cs[k] = c
            ss[k] = s
            if k > lo:
                H[k, k - 1] = c * x + s * y
                H[k + 1, k - 1] = 0j
            sc = s.conjugate()
            for j in range(k, jhi + 1):
                t1 = H[k, j]
                t2 = H[k + 1, j]
                H[k, j] = c * t1 + s * t2
                H[k + 1, j] = -sc * t1 + c * t2
            # rows below the diagonal that the bulge touches now; rows <= k later
            for r in range(k + 1, min(k + 2, hi) + 1):
                t1 = H[r, k]
                t2 = H[r, k + 1]
                H[r, k] = c * t1 + sc * t2
                H[r, k + 1] = -s * t1 + c * t2
        for r in range(jlo, hi):
            _rot_rows(H, r, max(r, lo), hi, cs, ss)
        if want_z:
            for r in range(n):
                _rot_rows(Z, r, lo, hi, cs, ss)
    return -1, total


@nb.njit(cache=True, nogil=True)
def triangular_eigvecs(T):
    # columns y_k with T y_k = T[k,k] y_k, y_k[k] = 1, zero below k
    n = T.shape[0]
    Y = np.zeros((n, n), dtype=np.complex128)
    tnorm = 0.0
    for i in range(n):
        for j in range(i, n):
            tnorm = max(tnorm, cabs1(T[i, j]))
    small = max(_EPS * tnorm, _SAFMIN)
    y = np.zeros(n, dtype=np.complex128)
    for k in range(n):
        lam = T[k, k]
        y[k] = 1.0 + 0j
        for i in range(k - 1, -1, -1):
            acc = 0j
            for j in range(i + 1, k + 1):
                acc += T[i, j] * y[j]
            den = T[i, i] - lam
            if cabs1(den) < small:
                den = small + 0j
            y[i] = -acc / den
            # keep the growth bounded; rescale the whole partial vector
            if cabs1(y[i]) > 1e100:
                for j in range(i, k + 1):
                    y[j] *= 1e-100
        for i in range(k + 1):
            Y[i, k] = y[i]
            y[i] = 0j
    return Y
