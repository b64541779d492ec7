"""Smith normal form over the integers, with unimodular transforms.

All arithmetic uses Python ints held in numpy object arrays, so entries never
overflow.
"""
import numpy as np


def as_int_matrix(M, shape=None):
    """Return a fresh object-dtype copy of ``M`` with Python int entries."""
    A = np.array(M, dtype=object)
    if shape is not None:
        A = A.reshape(shape)
    if A.ndim == 1:
        A = A.reshape(1, -1) if A.size else A.reshape(0, 0)
    out = np.empty(A.shape, dtype=object)
    for idx, v in np.ndenumerate(A):
        out[idx] = int(v)
    return out


def int_eye(n):
    E = np.zeros((n, n), dtype=object)
    for i in range(n):
        E[i, i] = 1
    return E


def int_zeros(m, n):
    Z = np.empty((m, n), dtype=object)
    Z.fill(0)
    return Z


def smith_normal_form(M, shape=None):
    """Return ``(D, U, V)`` with ``U @ M @ V == D``.

    ``D`` is diagonal with non-negative entries and ``D[i,i] | D[i+1,i+1]``;
    ``U`` and ``V`` are unimodular.
    """
    A = as_int_matrix(M, shape)
    m, n = A.shape
    U = int_eye(m)
    V = int_eye(n)

    def swap_rows(i, j):
        A[[i, j]] = A[[j, i]]
        U[[i, j]] = U[[j, i]]

    def swap_cols(i, j):
        A[:, [i, j]] = A[:, [j, i]]
        V[:, [i, j]] = V[:, [j, i]]

    t = 0
    while t < min(m, n):
        # pivot: smallest nonzero |entry| of the trailing block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                a = A[i, j]
                if a != 0 and (best is None or abs(a) < best[0]):
                    best = (abs(a), i, j)
        if best is None:
            break
        _, i, j = best
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            p = A[t, t]
            done = True
            for i in range(t + 1, m):
                q = A[i, t] // p
                if q:
                    A[i] = A[i] - q * A[t]
                    U[i] = U[i] - q * U[t]
                if A[i, t] != 0:
                    done = False
            for j in range(t + 1, n):
                q = A[t, j] // p
                if q:
                    A[:, j] = A[:, j] - q * A[:, t]
                    V[:, j] = V[:, j] - q * V[:, t]
                if A[t, j] != 0:
                    done = False
            if not done:
                # a remainder is smaller than the pivot; move it into place
                best = None
                for i in range(t, m):
                    if A[i, t] != 0 and (best is None or abs(A[i, t]) < best[0]):
                        best = (abs(A[i, t]), i, t)
                for j in range(t, n):
                    if A[t, j] != 0 and (best is None or abs(A[t, j]) < best[0]):
                        best = (abs(A[t, j]), t, j)
                _, i, j = best
                swap_rows(t, i)
                swap_cols(t, j)
                continue
            # divisibility of the trailing block by the pivot
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if A[i, j] % p != 0:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            A[t] = A[t] + A[bad]
            U[t] = U[t] + U[bad]
        if A[t, t] < 0:
            A[t] = -A[t]
            U[t] = -U[t]
        t += 1
    return A, U, V


def diagonal(D):
    return [D[i, i] for i in range(min(D.shape))]


def int_det(M):
    """Exact determinant by fraction-free Bareiss elimination."""
    A = as_int_matrix(M)
    n = A.shape[0]
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k, k] == 0:
            for i in range(k + 1, n):
                if A[i, k] != 0:
                    A[[k, i]] = A[[i, k]]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i, j] = (A[i, j] * A[k, k] - A[i, k] * A[k, j]) // prev
        prev = A[k, k]
    return sign * A[n - 1, n - 1]


def int_matmul(A, B):
    A = as_int_matrix(A)
    B = as_int_matrix(B)
    if A.shape[1] == 0:
        return int_zeros(A.shape[0], B.shape[1])
    return A.dot(B)


def integer_kernel(M, ncols=None):
    """Columns spanning ``{x in Z^n : M x = 0}`` (a basis of the lattice)."""
    A = as_int_matrix(M)
    if A.size == 0:
        n = A.shape[1] if ncols is None else ncols
        return int_eye(n)
    D, U, V = smith_normal_form(A)
    r = sum(1 for d in diagonal(D) if d != 0)
    return V[:, r:].copy()


def lattice_basis(G, nrows):
    """A basis (as columns) of the lattice spanned by the columns of ``G``."""
    G = as_int_matrix(G, (nrows, -1)) if np.size(G) else int_zeros(nrows, 0)
    if G.shape[1] == 0:
        return int_zeros(nrows, 0)
    D, U, V = smith_normal_form(G)
    d = diagonal(D)
    r = sum(1 for x in d if x != 0)
    Uinv = integer_inverse(U)
    B = Uinv[:, :r].copy()
    for i in range(r):
        B[:, i] = B[:, i] * d[i]
    return B


def integer_inverse(U):
    """Inverse of a unimodular matrix."""
    U = as_int_matrix(U)
    n = U.shape[0]
    D, P, Q = smith_normal_form(U)
    # P U Q = I (all invariants of a unimodular matrix are 1)
    if any(D[i, i] != 1 for i in range(n)):
        raise ValueError("matrix is not unimodular")
    return int_matmul(Q, P)


def integer_solve(M, b):
    """Some integer ``x`` with ``M x = b``, or ``None`` when none exists."""
    A = as_int_matrix(M)
    b = as_int_matrix(b, (A.shape[0], -1))
    m, n = A.shape
    if n == 0:
        return int_zeros(0, b.shape[1]) if all(v == 0 for v in b.flat) else None
    D, U, V = smith_normal_form(A)
    c = int_matmul(U, b)
    y = int_zeros(n, b.shape[1])
    d = diagonal(D)
    for i in range(m):
        di = d[i] if i < len(d) else 0
        for k in range(b.shape[1]):
            if di == 0:
                if c[i, k] != 0:
                    return None
            else:
                if c[i, k] % di != 0:
                    return None
                y[i, k] = c[i, k] // di
    return int_matmul(V, y)
