VERDICTS: dict[str, tuple[bool, str]] = {}
