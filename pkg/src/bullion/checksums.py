"""Page/group/file checksum hierarchy with incremental update.

Leaf hashes cover full page bytes (padding included). A group hash is the
hash of its pages' hash words concatenated; the root hashes the group
words. Updating one page therefore touches exactly one leaf, one group
hash and the root, reading only hash words, never other pages' bytes.

Hash is a 64-bit blake2b digest: the footer stores 64-bit checksum words
and integrity (not authentication) is the goal.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from hashlib import blake2b


def hash64(data: bytes) -> int:
    return int.from_bytes(blake2b(data, digest_size=8).digest(), "little")


def _hash_words(words: list[int]) -> int:
    return hash64(struct.pack(f"<{len(words)}Q", *words))


@dataclass
class ChecksumTree:
    page_hashes: list[int]
    group_hashes: list[int]
    root: int
    group_page_counts: list[int]

    def words(self) -> list[int]:
        """Footer serialization order: pages, then groups, then root."""
        return [*self.page_hashes, *self.group_hashes, self.root]

    def group_of_page(self, page_index: int) -> int:
        start = 0
        for g, count in enumerate(self.group_page_counts):
            if page_index < start + count:
                return g
            start += count
        raise IndexError(f"page {page_index} beyond {start} pages")


def compute_checksum_tree(pages: list[bytes], group_page_counts: list[int]) -> ChecksumTree:
    if sum(group_page_counts) != len(pages):
        raise ValueError("group page counts do not cover the page list")
    page_hashes = [hash64(p) for p in pages]
    group_hashes = []
    start = 0
    for count in group_page_counts:
        group_hashes.append(_hash_words(page_hashes[start:start + count]))
        start += count
    root = _hash_words(group_hashes)
    return ChecksumTree(page_hashes, group_hashes, root, list(group_page_counts))


def update_checksums_incremental(tree: ChecksumTree, page_index: int,
                                 new_page_bytes: bytes) -> ChecksumTree:
    """Recompute exactly one leaf, its group hash, and the root."""
    g = tree.group_of_page(page_index)
    page_hashes = list(tree.page_hashes)
    page_hashes[page_index] = hash64(new_page_bytes)
    start = sum(tree.group_page_counts[:g])
    group_hashes = list(tree.group_hashes)
    group_hashes[g] = _hash_words(page_hashes[start:start + tree.group_page_counts[g]])
    root = _hash_words(group_hashes)
    return ChecksumTree(page_hashes, group_hashes, root, list(tree.group_page_counts))


def tree_from_words(words: list[int], group_page_counts: list[int]) -> ChecksumTree:
    n_pages = sum(group_page_counts)
    n_groups = len(group_page_counts)
    if len(words) != n_pages + n_groups + 1:
        raise ValueError("checksum word count mismatch")
    return ChecksumTree(list(words[:n_pages]),
                        list(words[n_pages:n_pages + n_groups]),
                        words[-1], list(group_page_counts))
