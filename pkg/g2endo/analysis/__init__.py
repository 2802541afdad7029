"""
Analysis modules: exact polynomials, finite fields, number fields,
endomorphism tests, moduli, quadratic forms and covers.
"""

__all__ = ['intpoly', 'finitefield', 'numfield', 'endotests', 'moduli', 'qforms', 'covers']
