# 設定モジュール
