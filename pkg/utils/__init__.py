# 包初始化文件