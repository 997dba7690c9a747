# 场景执行模块
