"""Novelty tables over atom tuples of bounded size."""
from __future__ import annotations

from itertools import combinations

from ..pddl.grounding import bits


class NoveltyTable:
    """Remembers every tuple of at most ``k`` atoms made true so far.

    States are atom bitsets; ``relevant`` masks out atoms that never change
    (static atoms), which can never be new.
    """

    def __init__(self, k, relevant=-1):
        if k < 0:
            raise ValueError("k must be non-negative")
        self.k = k
        self.relevant = relevant
        self._seen_atoms = 0
        self._partners = {}  # k == 2: atom -> bitset of co-occurring atoms
        self._tuples = set()  # k >= 3
        self._started = False

    def register(self, state):
        """Record the tuples of ``state``; return whether any of them was new."""
        state &= self.relevant
        if self.k == 0:
            novel = not self._started
            self._started = True
            return novel
        self._started = True
        if self.k == 1:
            novel = bool(state & ~self._seen_atoms)
            self._seen_atoms |= state
            return novel
        if self.k == 2:
            novel = False
            partners = self._partners
            for a in bits(state):
                old = partners.get(a, 0)
                if state & ~old:
                    novel = True
                    partners[a] = old | state
            return novel
        atoms = bits(state)
        novel = False
        for size in range(1, self.k + 1):
            for t in combinations(atoms, size):
                if t not in self._tuples:
                    self._tuples.add(t)
                    novel = True
        return novel

    def size(self):
        """Number of distinct tuples recorded."""
        if self.k == 1:
            return bin(self._seen_atoms).count("1")
        if self.k == 2:
            total = 0
            for a, m in self._partners.items():
                total += bin(m >> a).count("1")  # pairs (a, b) with b >= a, singletons included
            return total
        return len(self._tuples)
