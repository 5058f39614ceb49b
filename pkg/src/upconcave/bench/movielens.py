"""MovieLens ``ratings.dat`` ingestion ("UserID::MovieID::Rating::Timestamp")."""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np


class MovieLensFormatError(ValueError):
    """Raised for malformed rating lines; ``errors`` holds (line number, message) pairs."""

    def __init__(self, path, errors):
        self.path = str(path)
        self.errors = list(errors)
        head = "; ".join(f"{self.path}:{n}: {msg}" for n, msg in self.errors[:5])
        more = f" (+{len(self.errors) - 5} more)" if len(self.errors) > 5 else ""
        super().__init__(head + more)


@dataclass(frozen=True, eq=False)
class Ratings:
    """Rating triples with dense 0-based user/movie indices and the original ids."""

    user: np.ndarray
    movie: np.ndarray
    rating: np.ndarray
    timestamp: np.ndarray
    user_ids: np.ndarray
    movie_ids: np.ndarray

    @classmethod
    def from_arrays(cls, users, movies, ratings, timestamps=None) -> "Ratings":
        users = np.asarray(users, dtype=np.int64)
        movies = np.asarray(movies, dtype=np.int64)
        ratings = np.asarray(ratings, dtype=np.int64)
        ts = np.zeros_like(users) if timestamps is None else np.asarray(timestamps, dtype=np.int64)
        uids, uidx = np.unique(users, return_inverse=True)
        mids, midx = np.unique(movies, return_inverse=True)
        return cls(uidx.reshape(-1), midx.reshape(-1), ratings, ts, uids, mids)

    def __len__(self) -> int:
        return self.rating.size

    @property
    def n_users(self) -> int:
        return self.user_ids.size

    @property
    def n_movies(self) -> int:
        return self.movie_ids.size

    def triples(self) -> list[tuple[int, int, int]]:
        """(user id, movie id, rating) with the ids as they appear in the file."""
        return list(zip(self.user_ids[self.user].tolist(), self.movie_ids[self.movie].tolist(), self.rating.tolist()))

    def save(self, path) -> None:
        np.savez_compressed(
            path,
            user=self.user,
            movie=self.movie,
            rating=self.rating,
            timestamp=self.timestamp,
            user_ids=self.user_ids,
            movie_ids=self.movie_ids,
        )

    @classmethod
    def load(cls, path) -> "Ratings":
        with np.load(path) as z:
            return cls(*(z[k] for k in ("user", "movie", "rating", "timestamp", "user_ids", "movie_ids")))


def _parse_line(line: str):
    parts = line.split("::")
    if len(parts) != 4:
        raise ValueError(f"expected 4 '::'-separated fields, got {len(parts)}")
    try:
        u, m, r, t = (int(p.strip()) for p in parts)
    except ValueError:
        raise ValueError(f"non-integer field in {line.strip()!r}") from None
    if not 1 <= r <= 5:
        raise ValueError(f"rating {r} outside 1..5")
    return u, m, r, t


def parse_movielens(path) -> Ratings:
    """Parse a ratings file; blank lines are skipped, any malformed line is an error."""
    users, movies, ratings, stamps, errors = [], [], [], [], []
    with open(path, encoding="latin-1") as fh:
        for n, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                u, m, r, t = _parse_line(line.rstrip("\r\n"))
            except ValueError as e:
                errors.append((n, str(e)))
                continue
            users.append(u)
            movies.append(m)
            ratings.append(r)
            stamps.append(t)
    if errors:
        raise MovieLensFormatError(path, errors)
    return Ratings.from_arrays(users, movies, ratings, stamps)


def write_movielens(ratings: Ratings, path) -> None:
    with open(path, "w", encoding="latin-1") as fh:
        for (u, m, r), t in zip(ratings.triples(), ratings.timestamp.tolist()):
            fh.write(f"{u}::{m}::{r}::{t}\n")


def load_ratings(path) -> Ratings:
    """Accept either a raw ratings file or an ``.npz`` written by ``Ratings.save``."""
    if os.fspath(path).endswith(".npz"):
        return Ratings.load(path)
    return parse_movielens(path)
