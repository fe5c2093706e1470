"""Base-level DNA helpers shared across the package.

Bases are 2-bit packed as A=0, C=1, G=2, T=3, so a k-mer with k <= 31
fits in one 64-bit integer.
"""

BASES = "ACGT"

BASE_CODE = {"A": 0, "C": 1, "G": 2, "T": 3}

# str.translate table mapping ACGT -> \x00..\x03 for fast bulk encoding
_ENCODE_TABLE = bytes.maketrans(b"ACGT", bytes([0, 1, 2, 3]))

_COMPLEMENT = str.maketrans("ACGT", "TGCA")

# IUPAC ambiguity codes and the concrete bases each one may stand for
IUPAC_CHOICES = {
    "R": "AG", "Y": "CT", "S": "GC", "W": "AT", "K": "GT", "M": "AC",
    "B": "CGT", "D": "AGT", "H": "ACT", "V": "ACG", "N": "ACGT",
}


def encode_bases(seq: str) -> bytes:
    """Translate an ACGT string to a bytes object of 2-bit codes."""
    return seq.encode("ascii").translate(_ENCODE_TABLE)


def revcomp(seq: str) -> str:
    """Reverse complement of an ACGT string."""
    return seq.translate(_COMPLEMENT)[::-1]


def kmer_code(kmer: str) -> int:
    """Pack a k-mer string into its forward 2-bit integer code."""
    code = 0
    for base in kmer:
        code = (code << 2) | BASE_CODE[base]
    return code


def decode_kmer(code: int, k: int) -> str:
    """Unpack a 2-bit k-mer code back to a string (mainly for debugging)."""
    out = []
    for shift in range(2 * (k - 1), -1, -2):
        out.append(BASES[(code >> shift) & 3])
    return "".join(out)
