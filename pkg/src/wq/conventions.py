"""The conventions record: every sign and normalization fixed once, imported
everywhere else.  Nothing else in the package hardcodes these choices.

Derivation of the product convention.  The exponential form of the product is

    f*g = exp((sqrt(-1) hbar / 2) sum_i (d/dxi_i d/dy_i - d/deta_i d/dx_i)) f g

evaluated on the diagonal.  Expanding to first order on (x1, xi1):

    x1*xi1 = x1 xi1 + (i hbar/2)(dx1/dxi1 * dxi1/dx1 - dx1/dx1 * dxi1/dxi1)
           = x1 xi1 - (i hbar/2),

and symmetrically xi1*x1 = x1 xi1 + (i hbar/2), hence

    [x1, xi1] = -i hbar        (COMMUTATOR_X_XI below)
    c0 = sigma((1/hbar)[x1~, xi1~]) = -i   (POISSON_CONSTANT below).

The symbol-side Poisson bracket is defined as c0 * {f,g}_classical with
{f,g}_classical = sum_i (df/dx_i dg/dxi_i - df/dxi_i dg/dx_i), so that
sigma((1/hbar)[f~,g~]) = poisson(sigma f, sigma g) with constant exactly 1.
"""

from gmpy2 import mpq

from .scalars import Scalar

# c0: value of the Poisson bracket {x1, xi1}; equals sigma((1/hbar)[x1,xi1]).
POISSON_CONSTANT = Scalar(0, -1)

# [x1, xi1] = COMMUTATOR_X_XI * hbar.
COMMUTATOR_X_XI = Scalar(0, -1)

# Multiplier of sigma((1/hbar)[f,g]) against poisson(sigma f, sigma g).
POISSON_VS_COMMUTATOR = Scalar(1)

# Order-n Moyal term carries (MOYAL_UNIT * hbar / 2)^n / n!.
MOYAL_UNIT = Scalar(0, 1)

# Weight grading: weight(x) = weight(xi) = 1, weight(hbar) = HBAR_WEIGHT.
# Forced by the Moyal term structure (each hbar power cancels two polynomial
# degrees), making every differential weight-homogeneous of weight 0.
HBAR_WEIGHT = 2

# Koszul differential on W (x) Lambda V*: the term dropping the i-th listed
# wedge factor (1-indexed within the sorted subset) carries KOSZUL_SIGN(i).
def KOSZUL_SIGN(i):
    return 1 if i % 2 == 1 else -1

# Alt is the unnormalized signed permutation sum; the 1/p! of HKR lives only
# in the HKR map itself.
HKR_FACTORIAL_NORMALIZED = True

# Contraction into omega^d: iota_hat(v) = CONTRACTION_SCALE * iota(v_sharp),
# where sharp sends the covector x_j to -e_{xi_j} and xi_j to +e_{x_j}.
# The scale is forced by requiring koszul_to_forms to intertwine the Koszul
# differential with hbar*d exactly.
CONTRACTION_SCALE = Scalar(0, -1)
SHARP_X_SIGN = -1   # x_j sharp = SHARP_X_SIGN * e_{xi_j}
SHARP_XI_SIGN = 1   # xi_j sharp = SHARP_XI_SIGN * e_{x_j}

# Contractions iota_{v1}...iota_{vq} are applied with v1 outermost (v_q acts
# first), matching the listed order of the wedge.
CONTRACT_LISTED_ORDER_OUTERMOST_FIRST = True

# Idempotent Chern character (Goodwillie-Jones) normalization, standard from
# the cyclic-homology literature and validated by the (b+B)-cycle condition:
#   ch_0(e) = tr(e),
#   ch_{2k}(e) = (-1)^k (2k)!/k! tr((e - 1/2) (x) e^{(x) 2k}),  k >= 1.
def CHERN_COEFF(k):
    if k == 0:
        return Scalar(1)
    num = 1
    for j in range(k + 1, 2 * k + 1):
        num *= j
    return Scalar(mpq((-1) ** k * num))

CHERN_SHIFT = mpq(1, 2)  # the e - 1/2 in the leading slot

# Chevalley-Eilenberg differential for relative cochains c in C^p(g,h;M):
#   (dc)(X_0..X_p) = sum_i (-1)^i X_i . c(..omit i..)
#                  + sum_{i<j} (-1)^{i+j} c(m-part[X_i,X_j], ..omit i,j..),
# brackets expanded hbar-linearly into the monomial basis of g.
#
# Total differential on Lie-degree-p Hom-valued cochains:
#   D = dCE + (-1)^p dHom, with dHom(phi) = d_T phi - (-1)^{|phi|} phi d_S.
#
# Cup product of cochains valued in a pairing m:
#   (a cup b)(X_1..X_{p+q}) =
#     sum over (p,q)-shuffles s of sign(s) * KOSZUL(a,b) * m(a(Xs..), b(Xs..)),
# with KOSZUL(a,b) = (-1)^{homdeg(a) * liedeg(b)}.
def CUP_KOSZUL_SIGN(hom_deg_a, lie_deg_b):
    return 1 if (hom_deg_a * lie_deg_b) % 2 == 0 else -1

# Negative/periodic cyclic totalization (the windowed (b,B)-bicomplex):
# CC^-_n = (+)_{q >= max(0,n), q = n mod 2} C_q,
# CC^per_n = (+)_{q >= 0, q = n mod 2} C_q,
# with total differential b + B, B: C_q -> C_{q+1} landing in total degree
# n - 1.  Chains are normalized (interior constant factors are zero), which
# closes every degree-capped weight block under both b and B.
