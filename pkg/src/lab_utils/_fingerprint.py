import base64
import hashlib
import json
import logging
import typing as T

from ._json import jsonable

_logger = logging.getLogger(__name__)


class Fingerprint:
    # language=rst
    """Helper class to compute provenance fingerprints.

    Example::

        fingerprint = Fingerprint().update(run_config.to_mapping()).digest()

    """
    def __init__(self):
        self._hash = hashlib.sha3_224()

    def update(self, v: T.Any) -> 'Fingerprint':
        # language=rst
        """Incrementally feeds state to this fingerprint.

        Parameters:
            v: anything :func:`lab_utils.jsonable` accepts.

        Returns:
            Fingerprint: self

        """
        self._hash.update(
            json.dumps(jsonable(v), ensure_ascii=False, sort_keys=True).encode()
        )
        return self

    def digest(self) -> str:
        # language=rst
        """URL-safe base64 of the sha3-224 digest of everything fed to :meth:`update`."""
        return base64.urlsafe_b64encode(self._hash.digest()).decode()
