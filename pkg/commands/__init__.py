# CLI サブコマンド（終了コードは全コマンド共通）
EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2
EXIT_GUARD = 3
EXIT_BUDGET = 4
